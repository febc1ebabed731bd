// SPDX-License-Identifier: Apache-2.0
//
// goofloc - multi-fingerprint fusion toolkit for array-based indoor localization
// Copyright (C) 2026 The goofloc authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "goofloc/channel_sim.hpp"
#include "goofloc/goof_builder.hpp"
#include "goofloc/rf_classifier.hpp"
#include "goofloc/swim_fusion.hpp"

namespace goofloc
{
    // Declarative sweep description. Defaults are the desk-scale protocol: a 4 x 4 grid in an
    // 8 x 8 m room, 7 elements, 640 snapshots cut into 20 groups, 12 train / 8 test groups.
    struct experiment_config
    {
        // room and array
        double room_width = 8.0;
        double room_height = 8.0;
        std::size_t grid_cols = 4;
        std::size_t grid_rows = 4;
        std::size_t elements = 7;
        double spacing_over_wavelength = 0.5;
        double carrier_frequency_hz = 950.0e6;

        // multipath
        std::size_t path_count = 20;
        double angular_spread_deg = 25.0;
        double delay_spread_ratio = 0.1; // delay spread as a fraction of the LOS delay
        double source_frequency = 0.125; // cycles per snapshot

        // noise
        std::vector<noise_kind> noise_kinds{noise_kind::gaussian, noise_kind::color, noise_kind::impulse};
        std::vector<double> snr_db{-10.0, -2.0, 6.0, 14.0, 22.0, 30.0};
        std::size_t fir_window_length = 5;
        double stable_alpha = 1.4;
        double stable_beta = 0.0;
        double stable_delta = 0.0;

        // fingerprints
        std::size_t snapshots = 640;
        std::size_t group_count = 20;
        std::size_t train_groups = 12;
        std::size_t test_groups = 8;
        double flom_p = 1.2;
        std::size_t psd_points = 0;

        // forests
        std::size_t tree_count = 40;
        int tree_depth = 8;
        split_primitive primitive = split_primitive::axis_aligned_stump;
        std::size_t feature_subspace_size = 0;
        std::size_t threshold_candidates = 10;

        // fusion
        std::vector<std::size_t> window_lengths{3, 5};

        // forest sweeps (RSSF, random 50/50 group split)
        std::vector<int> sweep_depths{2, 3, 4, 5, 6, 7, 8};
        std::vector<std::size_t> sweep_tree_counts{10, 40, 70, 100};
        noise_kind forest_sweep_noise = noise_kind::gaussian;

        std::size_t repetitions = 3;
        std::optional<std::uint64_t> seed;
        bool centroid_error = false; // adds the auxiliary centroid-distance column

        // Throws invalid_argument naming the offending field
        void validate() const;
        std::uint64_t hash() const;
        std::size_t grid_count() const noexcept { return grid_cols * grid_rows; }
        scenario room() const;
        array_geometry geometry() const;
        std::vector<std::string> method_names() const;
    };

    nlohmann::json config_to_json(const experiment_config &c);
    // Unknown keys are rejected; missing keys keep their defaults
    experiment_config config_from_json(const nlohmann::json &j);
    experiment_config load_config(const std::filesystem::path &file);
    void save_config(const std::filesystem::path &file, const experiment_config &c);

    // Field names in JSON key order
    const std::vector<std::string> &config_field_names();

    // Applies "field=value" where value is JSON or a bare string
    void set_config_field(experiment_config &c, std::string_view field, std::string_view value);

    std::uint64_t fnv1a64(std::string_view bytes) noexcept;
    std::string hash_hex(std::uint64_t h);

    // Per-grid clean blocks of one repetition (channels do not depend on noise or SNR)
    std::vector<snapshot_block> simulate_clean(const experiment_config &c, std::uint64_t rep_seed);
    // Noisy blocks for one (repetition, noise kind, SNR index) cell
    std::vector<snapshot_block> simulate_cell(const experiment_config &c, std::uint64_t rep_seed, noise_kind kind,
                                              std::size_t snr_index);
    noise_spec noise_for(const experiment_config &c, noise_kind kind, double snr_db);
    std::uint64_t repetition_seed(std::uint64_t master, std::size_t rep);

    enum class report_kind
    {
        snr,
        forest_depth,
        forest_number,
    };

    std::string_view to_string(report_kind k);
    report_kind report_kind_from_string(std::string_view name);

    struct report_cell
    {
        noise_kind noise = noise_kind::gaussian;
        double snr_db = 0.0;
        std::string method;
        std::vector<double> rho;           // one mean-over-grids value per repetition
        std::vector<double> centroid_error; // per repetition, meters; empty unless requested

        double mean_rho() const;
        double std_rho() const; // sample standard deviation, 0 for one repetition
    };

    struct timing_row
    {
        std::string method;
        double train_seconds = 0.0;       // per cell
        double test_seconds = 0.0;        // per cell, all grids
        double predictions_per_grid = 0.0;
        std::size_t cells = 0;            // cells averaged into this row
    };

    struct fusion_row
    {
        noise_kind noise;
        double snr_db;
        std::size_t repetition;
        fusion_record record;
    };

    struct report
    {
        report_kind kind = report_kind::snr;
        std::uint64_t config_hash = 0;
        std::uint64_t seed = 0;
        nlohmann::json config;
        std::vector<report_cell> cells;
        std::vector<timing_row> timing;
        std::vector<fusion_row> fusion;

        const report_cell *find(noise_kind noise, double snr_db, std::string_view method) const;
        // Every configured (noise, SNR, method) cell present and every value in [0, 1]
        void check_complete() const;
    };

    struct run_options
    {
        std::size_t jobs = 1; // worker threads; results never depend on this
    };

    report run_snr_sweep(const experiment_config &c, const run_options &opt = {});
    report run_forest_sweep(const experiment_config &c, report_kind vary, const run_options &opt = {});

    nlohmann::json report_to_json(const report &r);
    report report_from_json(const nlohmann::json &j);
    void save_report(const std::filesystem::path &file, const report &r);
    report load_report(const std::filesystem::path &file);

    // Refuses empty input, mixed config hashes, mixed kinds and duplicate cells
    report merge_reports(const std::vector<report> &parts);

    enum class report_format
    {
        csv,
        json,
    };

    // csv: curves_<noise>.csv per noise kind, timing.csv, config.json; json: report.json
    std::vector<std::filesystem::path> emit_report(const report &r, const std::filesystem::path &dir,
                                                   report_format format);

    std::string curves_csv(const report &r, noise_kind noise);
    std::string timing_csv(const report &r);

} // namespace goofloc

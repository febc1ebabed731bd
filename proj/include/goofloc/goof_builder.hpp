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

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "goofloc/channel_sim.hpp"
#include "goofloc/matrix.hpp"

namespace goofloc
{
    // The six fingerprint families. The enumeration order is also the column order of
    // every prediction matrix.
    enum class fingerprint_kind : std::uint8_t
    {
        cmf,
        rssf,
        psdf,
        ssf,
        focf,
        flomf,
    };

    inline constexpr std::size_t fingerprint_kind_count = 6;

    inline constexpr std::array<fingerprint_kind, fingerprint_kind_count> all_fingerprint_kinds = {
        fingerprint_kind::cmf, fingerprint_kind::rssf, fingerprint_kind::psdf,
        fingerprint_kind::ssf, fingerprint_kind::focf, fingerprint_kind::flomf};

    std::string_view to_string(fingerprint_kind kind);
    fingerprint_kind fingerprint_kind_from_string(std::string_view name);

    // Feature length after the real-valued transform: M^2, M, M*K, M, M^2, M^2
    std::size_t fingerprint_dimension(fingerprint_kind kind, std::size_t elements, std::size_t psd_points);

    struct fingerprint_sample
    {
        fingerprint_kind kind;
        std::vector<double> features;
        int grid_label;
    };

    // One fingerprint family: row-major sample x feature matrix plus labels
    struct fingerprint_table
    {
        fingerprint_kind kind = fingerprint_kind::cmf;
        std::size_t dimension = 0;
        std::vector<double> features;
        std::vector<int> labels;

        std::size_t rows() const noexcept { return labels.size(); }
        std::span<const double> row(std::size_t i) const { return {features.data() + i * dimension, dimension}; }
        void append(std::span<const double> f, int label);
    };

    struct goof_params
    {
        std::size_t group_count = 100; // fingerprints per grid
        double flom_p = 1.2;
        std::size_t psd_points = 0;    // 0 selects the full group length
    };

    // Labeled store of all six families. Rows are ordered grid by grid (ascending label),
    // then by group index, so row r of every table comes from the same snapshot group.
    struct goof
    {
        std::array<fingerprint_table, fingerprint_kind_count> tables;
        std::size_t elements = 0;
        std::size_t group_count = 0;
        std::size_t snapshots_per_group = 0;
        std::size_t psd_points = 0;
        double flom_p = 1.2;
        std::vector<int> grid_labels; // ascending
        noise_kind noise = noise_kind::none;
        double snr_db = noiseless_snr;

        const fingerprint_table &table(fingerprint_kind k) const { return tables[std::size_t(k)]; }
        fingerprint_table &table(fingerprint_kind k) { return tables[std::size_t(k)]; }
        std::size_t sample_count() const noexcept { return tables[0].rows(); }
        fingerprint_sample sample(fingerprint_kind k, std::size_t row) const;

        // Keep only the listed group indices (in the given order) for every grid
        goof select_groups(std::span<const std::size_t> groups) const;
        goof select_groups(std::size_t first, std::size_t count) const;
        goof select_grid(int label) const;

        void validate() const;
    };

    cmatrix est_covariance(const cmatrix &block);
    std::vector<double> extract_rss(const cmatrix &covariance);
    rmatrix est_psd(const cmatrix &block, std::size_t psd_points);
    std::vector<double> est_signal_subspace(const cmatrix &covariance);
    cmatrix est_foc(const cmatrix &block);
    cmatrix est_flom(const cmatrix &block, double p);

    struct symmetric_eigen
    {
        std::vector<double> values; // descending
        rmatrix vectors;            // column i belongs to values[i]
    };

    // Cyclic Jacobi; stops when the off-diagonal Frobenius norm drops below tol * ||A||_F
    symmetric_eigen jacobi_eigen(const rmatrix &a, double tol = 1e-12, std::size_t max_sweeps = 100);

    std::vector<double> vectorize(const cmatrix &m, fingerprint_kind kind);
    std::vector<double> vectorize(const rmatrix &m, fingerprint_kind kind);
    std::vector<double> vectorize(std::span<const double> v, fingerprint_kind kind);

    goof build_goof(std::span<const snapshot_block> blocks, const goof_params &params);

} // namespace goofloc

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

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "goofloc/channel_sim.hpp"
#include "goofloc/goof_builder.hpp"
#include "goofloc/rf_classifier.hpp"

namespace goofloc
{
    // Snapshot dataset file:
    //   "GOOF-SNAP\n", one line of JSON metadata, then Q blocks of M x L complex values stored
    //   column by column as little-endian float64 (re, im) pairs, in grid order.
    inline constexpr std::string_view dataset_magic = "GOOF-SNAP";
    inline constexpr int dataset_version = 1;

    std::string encode_dataset(std::span<const snapshot_block> blocks);
    std::vector<snapshot_block> decode_dataset(std::string_view bytes);

    void save_dataset(const std::filesystem::path &file, std::span<const snapshot_block> blocks);
    // Validates everything before returning; a damaged file yields format_error and nothing else
    std::vector<snapshot_block> load_dataset(const std::filesystem::path &file);

    // goof.json index plus one <KIND>.f64 matrix per family (row = sample, last column = label)
    void save_goof(const std::filesystem::path &dir, const goof &g);
    goof load_goof(const std::filesystem::path &dir);

    void save_bank(const std::filesystem::path &file, const classifier_bank &bank);
    classifier_bank load_bank(const std::filesystem::path &file);

    // One prediction matrix per grid
    std::string serialize_predictions(std::span<const prediction_matrix> per_grid);
    std::vector<prediction_matrix> parse_predictions(std::string_view text);
    void save_predictions(const std::filesystem::path &file, std::span<const prediction_matrix> per_grid);
    std::vector<prediction_matrix> load_predictions(const std::filesystem::path &file);

    std::string read_file(const std::filesystem::path &file);
    // Writes to a sibling temporary and renames it into place
    void write_file_atomic(const std::filesystem::path &file, std::string_view bytes);

} // namespace goofloc

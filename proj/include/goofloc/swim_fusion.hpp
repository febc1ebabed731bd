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

#include <cstddef>
#include <deque>
#include <optional>
#include <span>
#include <vector>

#include "goofloc/rf_classifier.hpp"

namespace goofloc
{
    // Empirical label entropy in bits. Labels must lie in 1..class_count.
    double label_entropy(std::span<const int> labels, int class_count);

    inline double classifier_entropy(std::span<const int> column, int class_count)
    {
        return label_entropy(column, class_count);
    }
    inline double sample_entropy(std::span<const int> row, int class_count)
    {
        return label_entropy(row, class_count);
    }

    // Rows [first, first + count) of a prediction matrix
    struct prediction_window
    {
        const prediction_matrix &matrix;
        std::size_t first = 0;
        std::size_t count = 0;

        std::vector<int> column(std::size_t h) const;
    };

    // Column with the smallest label entropy; ties go to the smallest index (0-based)
    std::size_t select_classifier(const prediction_window &window, int class_count);

    // Among labels present in column `selected`, the one occurring most often in the whole
    // window; ties go to the smallest label
    int constrained_mode(const prediction_window &window, std::size_t selected);

    struct fusion_result
    {
        std::size_t window_length = 0;
        std::vector<int> predictions;       // U = Z - W + 1 entries
        std::vector<std::size_t> selected;  // chosen column per window, 0-based
        double prediction_probability = -1; // negative until scored

        std::size_t prediction_count() const noexcept { return predictions.size(); }
    };

    fusion_result swim(const prediction_matrix &b, std::size_t window_length, int class_count);

    // Constrained mode over the whole matrix (a single prediction)
    int full_matrix_estimate(const prediction_matrix &b, int class_count);

    double prediction_probability(std::span<const int> predictions, int true_label);

    // Incremental SWIM over arriving rows; keeps only the last W rows
    class swim_stream
    {
    public:
        swim_stream(std::size_t window_length, std::size_t classifiers, int class_count);

        struct step
        {
            int label;
            std::size_t selected;
        };

        // Emits a prediction once W rows have arrived, then one per further row
        std::optional<step> push(std::span<const int> row);
        std::size_t rows_seen() const noexcept { return seen_; }

    private:
        std::size_t window_;
        std::size_t classifiers_;
        int class_count_;
        std::size_t seen_ = 0;
        std::deque<std::vector<int>> rows_;
    };

    struct fusion_record
    {
        int grid = 0;
        std::size_t window_length = 0;
        std::size_t prediction_count = 0;
        double prediction_probability = 0.0;
        std::vector<std::size_t> selection_histogram; // windows per classifier column
    };

    fusion_record make_fusion_record(const fusion_result &r, int grid, std::size_t classifiers);

} // namespace goofloc

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

#include "goofloc/swim_fusion.hpp"

#include <cmath>
#include <string>

#include "goofloc/error.hpp"

namespace goofloc
{
    namespace
    {
        std::vector<std::size_t> count_labels(std::span<const int> labels, int class_count)
        {
            if (class_count < 1)
                throw invalid_argument("class_count must be >= 1");
            std::vector<std::size_t> h(std::size_t(class_count) + 1, 0);
            for (int l : labels)
            {
                if (l < 1 || l > class_count)
                    throw invalid_argument("label " + std::to_string(l) + " outside 1.." + std::to_string(class_count));
                ++h[std::size_t(l)];
            }
            return h;
        }

        template <typename RowAt>
        std::size_t select_from_rows(std::size_t count, std::size_t cols, int class_count, RowAt &&row_at)
        {
            std::vector<int> col(count);
            std::size_t best = 0;
            double best_h = 0.0;
            for (std::size_t h = 0; h < cols; ++h)
            {
                for (std::size_t i = 0; i < count; ++i)
                    col[i] = row_at(i)[h];
                double e = label_entropy(col, class_count);
                if (h == 0 || e < best_h)
                {
                    best = h;
                    best_h = e;
                }
            }
            return best;
        }

        template <typename RowAt>
        int mode_from_rows(std::size_t count, std::size_t cols, std::size_t selected, RowAt &&row_at)
        {
            std::vector<int> candidates;
            candidates.reserve(count);
            for (std::size_t i = 0; i < count; ++i)
                candidates.push_back(row_at(i)[selected]);

            int best = 0;
            std::size_t best_n = 0;
            for (int c : candidates)
            {
                std::size_t n = 0;
                for (std::size_t i = 0; i < count; ++i)
                    for (std::size_t h = 0; h < cols; ++h)
                        n += row_at(i)[h] == c;
                if (best == 0 || n > best_n || (n == best_n && c < best))
                {
                    best = c;
                    best_n = n;
                }
            }
            return best;
        }
    } // namespace

    double label_entropy(std::span<const int> labels, int class_count)
    {
        if (labels.empty())
            throw invalid_argument("label_entropy: empty label vector");
        auto h = count_labels(labels, class_count);
        const double n = double(labels.size());
        double e = 0.0;
        for (auto c : h)
            if (c > 0)
            {
                double p = double(c) / n;
                e -= p * std::log2(p);
            }
        return e;
    }

    std::vector<int> prediction_window::column(std::size_t h) const
    {
        std::vector<int> out(count);
        for (std::size_t i = 0; i < count; ++i)
            out[i] = matrix.at(first + i, h);
        return out;
    }

    static void check_window(const prediction_window &w)
    {
        if (w.count == 0 || w.first + w.count > w.matrix.rows)
            throw invalid_argument("prediction window out of range");
        if (w.matrix.cols == 0)
            throw invalid_argument("prediction matrix has no columns");
    }

    std::size_t select_classifier(const prediction_window &window, int class_count)
    {
        check_window(window);
        return select_from_rows(window.count, window.matrix.cols, class_count,
                                [&](std::size_t i)
                                { return window.matrix.row(window.first + i); });
    }

    int constrained_mode(const prediction_window &window, std::size_t selected)
    {
        check_window(window);
        if (selected >= window.matrix.cols)
            throw invalid_argument("constrained_mode: selected column out of range");
        return mode_from_rows(window.count, window.matrix.cols, selected,
                              [&](std::size_t i)
                              { return window.matrix.row(window.first + i); });
    }

    fusion_result swim(const prediction_matrix &b, std::size_t window_length, int class_count)
    {
        if (window_length < 1)
            throw invalid_argument("swim: window length must be >= 1");
        if (window_length > b.rows)
            throw invalid_argument("swim: window length " + std::to_string(window_length) +
                                   " exceeds the " + std::to_string(b.rows) + " available samples");
        fusion_result r;
        r.window_length = window_length;
        const std::size_t U = b.rows - window_length + 1;
        r.predictions.reserve(U);
        r.selected.reserve(U);
        for (std::size_t u = 0; u < U; ++u)
        {
            prediction_window w{b, u, window_length};
            std::size_t g = select_classifier(w, class_count);
            r.selected.push_back(g);
            r.predictions.push_back(constrained_mode(w, g));
        }
        if (b.true_label > 0)
            r.prediction_probability = prediction_probability(r.predictions, b.true_label);
        return r;
    }

    int full_matrix_estimate(const prediction_matrix &b, int class_count)
    {
        return swim(b, b.rows, class_count).predictions.front();
    }

    double prediction_probability(std::span<const int> predictions, int true_label)
    {
        if (predictions.empty())
            throw invalid_argument("prediction_probability: no predictions");
        std::size_t hits = 0;
        for (int p : predictions)
            hits += p == true_label;
        return double(hits) / double(predictions.size());
    }

    swim_stream::swim_stream(std::size_t window_length, std::size_t classifiers, int class_count)
        : window_(window_length), classifiers_(classifiers), class_count_(class_count)
    {
        if (window_length < 1 || classifiers < 1 || class_count < 1)
            throw invalid_argument("swim_stream: window length, classifier count and class count must be >= 1");
    }

    std::optional<swim_stream::step> swim_stream::push(std::span<const int> row)
    {
        if (row.size() != classifiers_)
            throw invalid_argument("swim_stream: row has " + std::to_string(row.size()) + " entries, expected " +
                                   std::to_string(classifiers_));
        count_labels(row, class_count_);
        rows_.emplace_back(row.begin(), row.end());
        if (rows_.size() > window_)
            rows_.pop_front();
        ++seen_;
        if (rows_.size() < window_)
            return std::nullopt;

        auto row_at = [&](std::size_t i) -> const std::vector<int> &
        { return rows_[i]; };
        std::size_t g = select_from_rows(window_, classifiers_, class_count_, row_at);
        return step{mode_from_rows(window_, classifiers_, g, row_at), g};
    }

    fusion_record make_fusion_record(const fusion_result &r, int grid, std::size_t classifiers)
    {
        fusion_record rec;
        rec.grid = grid;
        rec.window_length = r.window_length;
        rec.prediction_count = r.predictions.size();
        rec.prediction_probability = r.prediction_probability;
        rec.selection_histogram.assign(classifiers, 0);
        for (auto g : r.selected)
        {
            if (g >= classifiers)
                throw invalid_argument("fusion record: selected column out of range");
            ++rec.selection_histogram[g];
        }
        return rec;
    }

} // namespace goofloc

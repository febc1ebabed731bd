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

#include "goofloc/goof_builder.hpp"
#include "goofloc/rng.hpp"

namespace goofloc
{
    enum class split_primitive : std::uint8_t
    {
        axis_aligned_stump,
        oriented_hyperplane_2d,
    };

    std::string_view to_string(split_primitive p);
    split_primitive split_primitive_from_string(std::string_view name);

    struct weak_learner_spec
    {
        split_primitive primitive = split_primitive::axis_aligned_stump;
        std::size_t feature_subspace_size = 0; // 0 selects ceil(sqrt(dimension))
        std::size_t threshold_candidates = 10;

        std::size_t subspace_for(std::size_t dimension) const;
        bool operator==(const weak_learner_spec &) const = default;
    };

    struct node_count_triple
    {
        std::uint64_t internal;
        std::uint64_t leaves;
        std::uint64_t total;

        bool operator==(const node_count_triple &) const = default;
    };

    // Internal, leaf and total node counts of a full binary tree of the given depth
    node_count_triple node_counts(int depth);

    // Shannon entropy (bits) of labels drawn from 1..class_count; the empty set has entropy 0
    double shannon_entropy(std::span<const int> labels, int class_count);

    double information_gain(std::span<const int> parent, std::span<const int> left,
                            std::span<const int> right, int class_count);

    // Split nodes route a sample left when the projection w_a*x[a] + w_b*x[b] <= threshold.
    // Stumps use w_a = 1, w_b = 0.
    struct tree_node
    {
        std::int32_t left = -1;
        std::int32_t right = -1;
        split_primitive primitive = split_primitive::axis_aligned_stump;
        std::uint32_t feature_a = 0;
        std::uint32_t feature_b = 0;
        double weight_a = 1.0;
        double weight_b = 0.0;
        double threshold = 0.0;
        std::vector<std::uint32_t> histogram; // leaves only; index q-1 counts label q

        bool is_leaf() const noexcept { return left < 0; }
        int majority_label() const; // ties to the smallest label
        bool operator==(const tree_node &) const = default;
    };

    struct decision_tree
    {
        std::vector<tree_node> nodes; // nodes[0] is the root

        int predict(std::span<const double> features) const;
        std::size_t depth() const;
        bool operator==(const decision_tree &) const = default;
    };

    // Borrowed row-major training data
    struct training_view
    {
        std::size_t dimension = 0;
        std::span<const double> features;
        std::span<const int> labels;
        int class_count = 0;

        std::size_t rows() const noexcept { return labels.size(); }
        const double *row(std::size_t i) const { return features.data() + i * dimension; }
        void validate() const;
    };

    decision_tree train_tree(const training_view &data, const weak_learner_spec &spec, int depth_limit,
                             rng_engine &rng);

    // Same as train_tree but on a multiset of row indices (bootstrap resample)
    decision_tree train_tree(const training_view &data, std::span<const std::size_t> rows,
                             const weak_learner_spec &spec, int depth_limit, rng_engine &rng);

    struct forest
    {
        std::vector<decision_tree> trees;
        int depth_limit = 8;
        fingerprint_kind kind = fingerprint_kind::cmf;
        int class_count = 0;
        std::uint64_t seed = 0;
        std::size_t dimension = 0;
        weak_learner_spec spec;

        bool operator==(const forest &) const = default;
    };

    // Tree t is grown on its own bootstrap resample with a stream derived from (seed, t)
    forest train_forest(const training_view &data, std::size_t tree_count, int depth_limit,
                        const weak_learner_spec &spec, std::uint64_t seed,
                        fingerprint_kind kind = fingerprint_kind::cmf);

    int predict_forest(const forest &f, std::span<const double> features);

    // Winner of a vote; ties go to the smallest label
    int majority_vote(std::span<const int> votes);

    std::string serialize_forest(const forest &f);
    forest parse_forest(std::string_view text);

    struct classifier_bank
    {
        std::array<forest, fingerprint_kind_count> forests;

        const forest &at(fingerprint_kind k) const { return forests[std::size_t(k)]; }
    };

    struct forest_params
    {
        std::size_t tree_count = 50;
        int depth_limit = 8;
        weak_learner_spec spec;
        std::uint64_t seed = 0;
    };

    // One forest per fingerprint kind; the per-kind seed is derived from params.seed
    classifier_bank train_bank(const goof &training, const forest_params &params,
                               std::array<double, fingerprint_kind_count> *train_seconds = nullptr);

    std::string serialize_bank(const classifier_bank &bank);
    classifier_bank parse_bank(std::string_view text);

    // Z x H matrix of predicted labels, row-major. Column order follows all_fingerprint_kinds.
    struct prediction_matrix
    {
        std::size_t rows = 0;
        std::size_t cols = fingerprint_kind_count;
        std::vector<int> labels;
        int true_label = 0; // 0 when unknown or mixed

        int at(std::size_t z, std::size_t h) const { return labels[z * cols + h]; }
        std::span<const int> row(std::size_t z) const { return {labels.data() + z * cols, cols}; }
        std::vector<int> column(std::size_t h) const;
    };

    // B(z, h) = prediction of forest h on sample z of family h. The tables must be aligned
    // (same row count, row z of each from the same snapshot group).
    prediction_matrix test_goof(const classifier_bank &bank, std::span<const fingerprint_table> tables,
                                std::array<double, fingerprint_kind_count> *test_seconds = nullptr);
    prediction_matrix test_goof(const classifier_bank &bank, const goof &samples,
                                std::array<double, fingerprint_kind_count> *test_seconds = nullptr);

} // namespace goofloc

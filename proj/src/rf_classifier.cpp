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

#include "goofloc/rf_classifier.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <numbers>
#include <string>

#include <json.hpp>

#include "goofloc/error.hpp"

namespace goofloc
{
    using nlohmann::json;

    namespace
    {
        constexpr int format_version = 1;

        // Entropy in bits from a class histogram holding n samples
        double entropy_from_counts(std::span<const std::uint32_t> counts, std::size_t n)
        {
            if (n == 0)
                return 0.0;
            double acc = 0.0;
            for (auto c : counts)
                if (c > 0)
                    acc += double(c) * std::log2(double(c));
            return std::log2(double(n)) - acc / double(n);
        }

        std::vector<std::uint32_t> histogram_of(std::span<const int> labels, int class_count)
        {
            std::vector<std::uint32_t> h(std::size_t(class_count), 0);
            for (int l : labels)
            {
                if (l < 1 || l > class_count)
                    throw invalid_argument("label " + std::to_string(l) + " outside 1.." + std::to_string(class_count));
                ++h[std::size_t(l - 1)];
            }
            return h;
        }

        class tree_builder
        {
        public:
            tree_builder(const training_view &data, const weak_learner_spec &spec, int depth_limit, rng_engine &rng)
                : data_(data), spec_(spec), depth_limit_(depth_limit), rng_(rng),
                  left_counts_(std::size_t(data.class_count)), total_counts_(std::size_t(data.class_count))
            {
            }

            decision_tree build(std::vector<std::size_t> rows)
            {
                rows_ = std::move(rows);
                proj_.resize(rows_.size());
                grow(0, rows_.size(), 1);
                return std::move(tree_);
            }

        private:
            struct candidate
            {
                split_primitive primitive;
                std::uint32_t a, b;
                double wa, wb, threshold;
            };

            double project(const candidate &c, std::size_t row) const
            {
                const double *x = data_.row(row);
                return c.wa * x[c.a] + c.wb * x[c.b];
            }

            std::int32_t make_leaf(std::size_t begin, std::size_t end)
            {
                tree_node n;
                n.histogram.assign(std::size_t(data_.class_count), 0);
                for (std::size_t i = begin; i < end; ++i)
                    ++n.histogram[std::size_t(data_.labels[rows_[i]] - 1)];
                tree_.nodes.push_back(std::move(n));
                return std::int32_t(tree_.nodes.size() - 1);
            }

            // Evaluates every threshold for one projection; updates best/best_gain
            void try_projection(candidate c, std::size_t begin, std::size_t end, double parent_entropy,
                                candidate &best, double &best_gain, bool &found)
            {
                const std::size_t n = end - begin;
                double lo = std::numeric_limits<double>::infinity(), hi = -lo;
                for (std::size_t i = begin; i < end; ++i)
                {
                    proj_[i - begin] = project(c, rows_[i]);
                    lo = std::min(lo, proj_[i - begin]);
                    hi = std::max(hi, proj_[i - begin]);
                }
                if (!(hi > lo))
                    return;

                std::uniform_real_distribution<double> unit(0.0, 1.0);
                for (std::size_t t = 0; t < spec_.threshold_candidates; ++t)
                {
                    c.threshold = lo + unit(rng_) * (hi - lo);
                    std::fill(left_counts_.begin(), left_counts_.end(), 0u);
                    std::size_t nl = 0;
                    for (std::size_t i = 0; i < n; ++i)
                        if (proj_[i] <= c.threshold)
                        {
                            ++left_counts_[std::size_t(data_.labels[rows_[begin + i]] - 1)];
                            ++nl;
                        }
                    const std::size_t nr = n - nl;
                    if (nl == 0 || nr == 0)
                        continue; // empty child: gain 0, never preferred over a real split

                    for (std::size_t q = 0; q < right_counts_.size(); ++q)
                        right_counts_[q] = total_counts_[q] - left_counts_[q];
                    double gain = parent_entropy - (double(nl) * entropy_from_counts(left_counts_, nl) +
                                                    double(nr) * entropy_from_counts(right_counts_, nr)) /
                                                       double(n);
                    if (!found || gain > best_gain)
                    {
                        found = true;
                        best_gain = gain;
                        best = c;
                    }
                }
            }

            std::int32_t grow(std::size_t begin, std::size_t end, int depth)
            {
                const std::size_t n = end - begin;
                std::fill(total_counts_.begin(), total_counts_.end(), 0u);
                for (std::size_t i = begin; i < end; ++i)
                    ++total_counts_[std::size_t(data_.labels[rows_[i]] - 1)];
                const bool pure = std::count_if(total_counts_.begin(), total_counts_.end(),
                                                [](std::uint32_t c)
                                                { return c > 0; }) <= 1;
                if (depth >= depth_limit_ || pure || n < 2)
                    return make_leaf(begin, end);

                right_counts_.assign(total_counts_.size(), 0u);
                const double parent_entropy = entropy_from_counts(total_counts_, n);
                const std::size_t d = data_.dimension;
                const std::size_t m = spec_.subspace_for(d);

                candidate best{};
                double best_gain = 0.0;
                bool found = false;

                if (spec_.primitive == split_primitive::axis_aligned_stump)
                {
                    // m distinct features by partial Fisher-Yates
                    features_.resize(d);
                    for (std::size_t i = 0; i < d; ++i)
                        features_[i] = std::uint32_t(i);
                    for (std::size_t i = 0; i < m; ++i)
                    {
                        std::uniform_int_distribution<std::size_t> pick(i, d - 1);
                        std::swap(features_[i], features_[pick(rng_)]);
                        candidate c{split_primitive::axis_aligned_stump, features_[i], features_[i], 1.0, 0.0, 0.0};
                        try_projection(c, begin, end, parent_entropy, best, best_gain, found);
                    }
                }
                else
                {
                    std::uniform_int_distribution<std::size_t> pick(0, d - 1);
                    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
                    for (std::size_t i = 0; i < m; ++i)
                    {
                        std::size_t a = pick(rng_), b = a;
                        if (d > 1)
                            while (b == a)
                                b = pick(rng_);
                        double phi = angle(rng_);
                        candidate c{split_primitive::oriented_hyperplane_2d, std::uint32_t(a), std::uint32_t(b),
                                    std::cos(phi), d > 1 ? std::sin(phi) : 0.0, 0.0};
                        if (d == 1)
                            c.wa = 1.0;
                        try_projection(c, begin, end, parent_entropy, best, best_gain, found);
                    }
                }

                if (!found)
                    return make_leaf(begin, end);

                auto mid = std::partition(rows_.begin() + std::ptrdiff_t(begin), rows_.begin() + std::ptrdiff_t(end),
                                          [&](std::size_t r)
                                          { return project(best, r) <= best.threshold; });
                const std::size_t split = std::size_t(mid - rows_.begin());

                tree_node node;
                node.primitive = best.primitive;
                node.feature_a = best.a;
                node.feature_b = best.b;
                node.weight_a = best.wa;
                node.weight_b = best.wb;
                node.threshold = best.threshold;
                tree_.nodes.push_back(std::move(node));
                const auto self = std::int32_t(tree_.nodes.size() - 1);

                const std::int32_t l = grow(begin, split, depth + 1);
                const std::int32_t r = grow(split, end, depth + 1);
                tree_.nodes[std::size_t(self)].left = l;
                tree_.nodes[std::size_t(self)].right = r;
                return self;
            }

            const training_view &data_;
            const weak_learner_spec &spec_;
            int depth_limit_;
            rng_engine &rng_;
            decision_tree tree_;
            std::vector<std::size_t> rows_;
            std::vector<double> proj_;
            std::vector<std::uint32_t> features_;
            std::vector<std::uint32_t> left_counts_, right_counts_, total_counts_;
        };

        json node_to_json(const decision_tree &t, std::int32_t i)
        {
            const tree_node &n = t.nodes[std::size_t(i)];
            if (n.is_leaf())
            {
                json leaf = json::array();
                for (std::size_t q = 0; q < n.histogram.size(); ++q)
                    if (n.histogram[q] > 0)
                        leaf.push_back({int(q + 1), n.histogram[q]});
                return {{"leaf", leaf}};
            }
            return {{"split",
                     {{"primitive", to_string(n.primitive)},
                      {"features", {n.feature_a, n.feature_b}},
                      {"weights", {n.weight_a, n.weight_b}},
                      {"threshold", n.threshold}}},
                    {"left", node_to_json(t, n.left)},
                    {"right", node_to_json(t, n.right)}};
        }

        std::int32_t node_from_json(const json &j, decision_tree &t, int class_count, std::size_t dimension, int depth)
        {
            if (depth > 64)
                throw format_error("forest: tree nesting too deep", 0);
            tree_node n;
            if (j.contains("leaf"))
            {
                n.histogram.assign(std::size_t(class_count), 0);
                for (const auto &e : j.at("leaf"))
                {
                    int q = e.at(0).get<int>();
                    if (q < 1 || q > class_count)
                        throw format_error("forest: leaf label out of range", 0);
                    n.histogram[std::size_t(q - 1)] = e.at(1).get<std::uint32_t>();
                }
                t.nodes.push_back(std::move(n));
                return std::int32_t(t.nodes.size() - 1);
            }
            const json &s = j.at("split");
            n.primitive = split_primitive_from_string(s.at("primitive").get<std::string>());
            n.feature_a = s.at("features").at(0).get<std::uint32_t>();
            n.feature_b = s.at("features").at(1).get<std::uint32_t>();
            if (n.feature_a >= dimension || n.feature_b >= dimension)
                throw format_error("forest: split feature index out of range", 0);
            n.weight_a = s.at("weights").at(0).get<double>();
            n.weight_b = s.at("weights").at(1).get<double>();
            n.threshold = s.at("threshold").get<double>();
            t.nodes.push_back(std::move(n));
            const auto self = std::int32_t(t.nodes.size() - 1);
            const auto l = node_from_json(j.at("left"), t, class_count, dimension, depth + 1);
            const auto r = node_from_json(j.at("right"), t, class_count, dimension, depth + 1);
            t.nodes[std::size_t(self)].left = l;
            t.nodes[std::size_t(self)].right = r;
            return self;
        }

        json forest_to_json(const forest &f)
        {
            json trees = json::array();
            for (const auto &t : f.trees)
                trees.push_back(t.nodes.empty() ? json(nullptr) : node_to_json(t, 0));
            return {{"format", "goofloc-forest"},
                    {"version", format_version},
                    {"kind", to_string(f.kind)},
                    {"class_count", f.class_count},
                    {"depth_limit", f.depth_limit},
                    {"tree_count", f.trees.size()},
                    {"seed", f.seed},
                    {"dimension", f.dimension},
                    {"primitive", to_string(f.spec.primitive)},
                    {"feature_subspace_size", f.spec.feature_subspace_size},
                    {"threshold_candidates", f.spec.threshold_candidates},
                    {"trees", trees}};
        }

        forest forest_from_json(const json &j)
        {
            if (j.value("format", "") != "goofloc-forest")
                throw format_error("forest: missing goofloc-forest format tag", 0);
            if (j.at("version").get<int>() != format_version)
                throw format_error("forest: unsupported version", 0);
            forest f;
            f.kind = fingerprint_kind_from_string(j.at("kind").get<std::string>());
            f.class_count = j.at("class_count").get<int>();
            f.depth_limit = j.at("depth_limit").get<int>();
            f.seed = j.at("seed").get<std::uint64_t>();
            f.dimension = j.at("dimension").get<std::size_t>();
            f.spec.primitive = split_primitive_from_string(j.at("primitive").get<std::string>());
            f.spec.feature_subspace_size = j.at("feature_subspace_size").get<std::size_t>();
            f.spec.threshold_candidates = j.at("threshold_candidates").get<std::size_t>();
            if (f.class_count < 1 || f.dimension < 1)
                throw format_error("forest: class_count and dimension must be positive", 0);
            const auto &trees = j.at("trees");
            if (trees.size() != j.at("tree_count").get<std::size_t>())
                throw format_error("forest: tree_count does not match the number of trees", 0);
            for (const auto &tj : trees)
            {
                decision_tree t;
                node_from_json(tj, t, f.class_count, f.dimension, 0);
                f.trees.push_back(std::move(t));
            }
            return f;
        }

        template <typename F>
        auto parse_document(std::string_view text, F &&convert)
        {
            json j;
            try
            {
                j = json::parse(text.begin(), text.end());
            }
            catch (const json::parse_error &e)
            {
                throw format_error(std::string("malformed document: ") + e.what(), e.byte);
            }
            try
            {
                return convert(j);
            }
            catch (const json::exception &e)
            {
                throw format_error(std::string("invalid document: ") + e.what(), 0);
            }
        }
    } // namespace

    std::string_view to_string(split_primitive p)
    {
        return p == split_primitive::axis_aligned_stump ? "axis_aligned_stump" : "oriented_hyperplane_2d";
    }

    split_primitive split_primitive_from_string(std::string_view name)
    {
        if (name == "axis_aligned_stump" || name == "stump")
            return split_primitive::axis_aligned_stump;
        if (name == "oriented_hyperplane_2d" || name == "oriented")
            return split_primitive::oriented_hyperplane_2d;
        throw invalid_argument("unknown split primitive '" + std::string(name) + "'");
    }

    std::size_t weak_learner_spec::subspace_for(std::size_t dimension) const
    {
        if (dimension == 0)
            throw invalid_argument("weak learner: feature dimension must be >= 1");
        std::size_t m = feature_subspace_size;
        if (m == 0)
            m = std::size_t(std::ceil(std::sqrt(double(dimension))));
        if (m > dimension)
            throw invalid_argument("weak learner: feature_subspace_size exceeds the feature dimension");
        return m;
    }

    node_count_triple node_counts(int depth)
    {
        if (depth < 1)
            throw invalid_argument("node_counts: depth must be >= 1");
        if (depth > 63)
            throw invalid_argument("node_counts: depth too large");
        const std::uint64_t full = std::uint64_t(1) << depth;
        return {full / 2 - 1, full / 2, full - 1};
    }

    double shannon_entropy(std::span<const int> labels, int class_count)
    {
        if (labels.empty())
            return 0.0;
        auto h = histogram_of(labels, class_count);
        return entropy_from_counts(h, labels.size());
    }

    double information_gain(std::span<const int> parent, std::span<const int> left,
                            std::span<const int> right, int class_count)
    {
        if (left.size() + right.size() != parent.size())
            throw invalid_argument("information_gain: children do not partition the parent");
        auto hp = histogram_of(parent, class_count);
        auto hl = histogram_of(left, class_count);
        auto hr = histogram_of(right, class_count);
        for (std::size_t q = 0; q < hp.size(); ++q)
            if (hl[q] + hr[q] != hp[q])
                throw invalid_argument("information_gain: children do not partition the parent");
        if (parent.empty())
            return 0.0;
        return entropy_from_counts(hp, parent.size()) -
               (double(left.size()) * entropy_from_counts(hl, left.size()) +
                double(right.size()) * entropy_from_counts(hr, right.size())) /
                   double(parent.size());
    }

    int tree_node::majority_label() const
    {
        std::size_t best = 0;
        for (std::size_t q = 1; q < histogram.size(); ++q)
            if (histogram[q] > histogram[best])
                best = q;
        return int(best + 1);
    }

    int decision_tree::predict(std::span<const double> x) const
    {
        std::size_t i = 0;
        while (!nodes[i].is_leaf())
        {
            const tree_node &n = nodes[i];
            double p = n.weight_a * x[n.feature_a] + n.weight_b * x[n.feature_b];
            i = std::size_t(p <= n.threshold ? n.left : n.right);
        }
        return nodes[i].majority_label();
    }

    std::size_t decision_tree::depth() const
    {
        if (nodes.empty())
            return 0;
        std::size_t best = 0;
        std::vector<std::pair<std::size_t, std::size_t>> stack{{0, 1}};
        while (!stack.empty())
        {
            auto [i, d] = stack.back();
            stack.pop_back();
            best = std::max(best, d);
            if (!nodes[i].is_leaf())
            {
                stack.push_back({std::size_t(nodes[i].left), d + 1});
                stack.push_back({std::size_t(nodes[i].right), d + 1});
            }
        }
        return best;
    }

    void training_view::validate() const
    {
        if (labels.empty())
            throw invalid_argument("training data: at least one sample is required");
        if (dimension == 0 || features.size() != labels.size() * dimension)
            throw invalid_argument("training data: feature matrix shape mismatch");
        if (class_count < 1)
            throw invalid_argument("training data: class_count must be >= 1");
        for (int l : labels)
            if (l < 1 || l > class_count)
                throw invalid_argument("training data: label " + std::to_string(l) + " outside 1.." +
                                       std::to_string(class_count));
    }

    decision_tree train_tree(const training_view &data, std::span<const std::size_t> rows,
                             const weak_learner_spec &spec, int depth_limit, rng_engine &rng)
    {
        data.validate();
        if (depth_limit < 1)
            throw invalid_argument("train_tree: depth limit must be >= 1");
        if (rows.empty())
            throw invalid_argument("train_tree: empty sample set");
        spec.subspace_for(data.dimension);
        tree_builder b(data, spec, depth_limit, rng);
        return b.build({rows.begin(), rows.end()});
    }

    decision_tree train_tree(const training_view &data, const weak_learner_spec &spec, int depth_limit,
                             rng_engine &rng)
    {
        std::vector<std::size_t> rows(data.rows());
        for (std::size_t i = 0; i < rows.size(); ++i)
            rows[i] = i;
        return train_tree(data, rows, spec, depth_limit, rng);
    }

    forest train_forest(const training_view &data, std::size_t tree_count, int depth_limit,
                        const weak_learner_spec &spec, std::uint64_t seed, fingerprint_kind kind)
    {
        data.validate();
        if (tree_count < 1)
            throw invalid_argument("train_forest: tree count must be >= 1");
        forest f;
        f.depth_limit = depth_limit;
        f.kind = kind;
        f.class_count = data.class_count;
        f.seed = seed;
        f.dimension = data.dimension;
        f.spec = spec;
        f.trees.reserve(tree_count);

        const std::size_t n = data.rows();
        std::vector<std::size_t> bag(n);
        for (std::size_t t = 0; t < tree_count; ++t)
        {
            rng_engine rng(derive_seed(seed, {t}));
            std::uniform_int_distribution<std::size_t> pick(0, n - 1);
            for (auto &r : bag)
                r = pick(rng);
            f.trees.push_back(train_tree(data, bag, spec, depth_limit, rng));
        }
        return f;
    }

    int majority_vote(std::span<const int> votes)
    {
        if (votes.empty())
            throw invalid_argument("majority_vote: no votes");
        std::map<int, std::size_t> counts;
        for (int v : votes)
            ++counts[v];
        auto best = counts.begin();
        for (auto it = counts.begin(); it != counts.end(); ++it)
            if (it->second > best->second)
                best = it;
        return best->first;
    }

    int predict_forest(const forest &f, std::span<const double> features)
    {
        if (features.size() != f.dimension)
            throw invalid_argument("predict_forest: feature length " + std::to_string(features.size()) +
                                   " does not match forest dimension " + std::to_string(f.dimension));
        if (f.trees.empty())
            throw invalid_argument("predict_forest: forest has no trees");
        std::vector<std::uint32_t> counts(std::size_t(f.class_count), 0);
        for (const auto &t : f.trees)
            ++counts[std::size_t(t.predict(features) - 1)];
        std::size_t best = 0;
        for (std::size_t q = 1; q < counts.size(); ++q)
            if (counts[q] > counts[best])
                best = q;
        return int(best + 1);
    }

    std::string serialize_forest(const forest &f)
    {
        return forest_to_json(f).dump();
    }

    forest parse_forest(std::string_view text)
    {
        return parse_document(text, [](const json &j)
                              { return forest_from_json(j); });
    }

    classifier_bank train_bank(const goof &training, const forest_params &params,
                               std::array<double, fingerprint_kind_count> *train_seconds)
    {
        if (training.grid_labels.empty() || training.sample_count() == 0)
            throw invalid_argument("train_bank: empty training set");
        const int class_count = *std::max_element(training.grid_labels.begin(), training.grid_labels.end());
        classifier_bank bank;
        for (auto k : all_fingerprint_kinds)
        {
            const auto &t = training.table(k);
            training_view view{t.dimension, t.features, t.labels, class_count};
            auto start = std::chrono::steady_clock::now();
            bank.forests[std::size_t(k)] = train_forest(view, params.tree_count, params.depth_limit, params.spec,
                                                        derive_seed(params.seed, {std::uint64_t(k)}), k);
            if (train_seconds)
                (*train_seconds)[std::size_t(k)] =
                    std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        }
        return bank;
    }

    std::string serialize_bank(const classifier_bank &bank)
    {
        json forests = json::array();
        for (const auto &f : bank.forests)
            forests.push_back(forest_to_json(f));
        return json{{"format", "goofloc-bank"}, {"version", format_version}, {"forests", forests}}.dump();
    }

    classifier_bank parse_bank(std::string_view text)
    {
        return parse_document(text, [](const json &j)
                              {
            if (j.value("format", "") != "goofloc-bank")
                throw format_error("bank: missing goofloc-bank format tag", 0);
            if (j.at("version").get<int>() != format_version)
                throw format_error("bank: unsupported version", 0);
            const auto &forests = j.at("forests");
            if (forests.size() != fingerprint_kind_count)
                throw format_error("bank: expected one forest per fingerprint kind", 0);
            classifier_bank bank;
            for (std::size_t i = 0; i < fingerprint_kind_count; ++i)
            {
                bank.forests[i] = forest_from_json(forests[i]);
                if (bank.forests[i].kind != all_fingerprint_kinds[i])
                    throw format_error("bank: forests out of fingerprint-kind order", 0);
            }
            return bank; });
    }

    std::vector<int> prediction_matrix::column(std::size_t h) const
    {
        std::vector<int> out(rows);
        for (std::size_t z = 0; z < rows; ++z)
            out[z] = at(z, h);
        return out;
    }

    prediction_matrix test_goof(const classifier_bank &bank, std::span<const fingerprint_table> tables,
                                std::array<double, fingerprint_kind_count> *test_seconds)
    {
        if (tables.size() != fingerprint_kind_count)
            throw invalid_argument("test_goof: expected one sample table per fingerprint kind");
        const std::size_t Z = tables[0].rows();
        for (const auto &t : tables)
            if (t.rows() != Z)
                throw invalid_argument("test_goof: ragged sample counts across fingerprint kinds");
        if (Z == 0)
            throw invalid_argument("test_goof: no test samples");

        prediction_matrix B;
        B.rows = Z;
        B.cols = fingerprint_kind_count;
        B.labels.assign(Z * B.cols, 0);
        for (std::size_t h = 0; h < fingerprint_kind_count; ++h)
        {
            const auto &t = tables[h];
            const auto &f = bank.forests[h];
            if (t.kind != f.kind)
                throw invalid_argument("test_goof: sample table order does not match the bank");
            auto start = std::chrono::steady_clock::now();
            for (std::size_t z = 0; z < Z; ++z)
                B.labels[z * B.cols + h] = predict_forest(f, t.row(z));
            if (test_seconds)
                (*test_seconds)[h] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        }

        const auto &labels = tables[0].labels;
        B.true_label = std::all_of(labels.begin(), labels.end(), [&](int l)
                                   { return l == labels[0]; })
                           ? labels[0]
                           : 0;
        return B;
    }

    prediction_matrix test_goof(const classifier_bank &bank, const goof &samples,
                                std::array<double, fingerprint_kind_count> *test_seconds)
    {
        return test_goof(bank, std::span<const fingerprint_table>(samples.tables), test_seconds);
    }

} // namespace goofloc

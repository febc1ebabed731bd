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

#include <doctest.h>

#include <cmath>
#include <random>

#include "goofloc/error.hpp"
#include "goofloc/swim_fusion.hpp"

using namespace goofloc;

namespace
{
    prediction_matrix make(std::vector<std::vector<int>> rows, int truth = 0)
    {
        prediction_matrix b;
        b.rows = rows.size();
        b.cols = rows.empty() ? 0 : rows[0].size();
        for (const auto &r : rows)
            b.labels.insert(b.labels.end(), r.begin(), r.end());
        b.true_label = truth;
        return b;
    }

    prediction_matrix random_matrix(std::size_t Z, std::size_t H, int Q, std::uint64_t seed)
    {
        std::mt19937_64 rng(seed);
        std::uniform_int_distribution<int> lab(1, Q);
        prediction_matrix b;
        b.rows = Z;
        b.cols = H;
        b.labels.resize(Z * H);
        for (auto &v : b.labels)
            v = lab(rng);
        return b;
    }
} // namespace

TEST_CASE("classifier and sample entropy")
{
    std::vector<int> constant(10, 4);
    CHECK(classifier_entropy(constant, 8) == 0.0);

    std::vector<int> uniform;
    for (int q = 1; q <= 64; ++q)
        uniform.push_back(q);
    CHECK(classifier_entropy(uniform, 64) == doctest::Approx(6.0));

    std::vector<int> pair = {1, 1, 2, 2};
    CHECK(classifier_entropy(pair, 2) == doctest::Approx(1.0));

    std::vector<int> agree(6, 3), disagree = {1, 2, 3, 4, 5, 6}, row = {5, 1, 3, 5, 5, 5};
    CHECK(sample_entropy(agree, 6) == 0.0);
    CHECK(sample_entropy(disagree, 6) == doctest::Approx(std::log2(6.0)));
    CHECK(sample_entropy(row, 6) ==
          doctest::Approx(-(4.0 / 6 * std::log2(4.0 / 6) + 2 * (1.0 / 6) * std::log2(1.0 / 6))));

    CHECK_THROWS_AS(classifier_entropy({}, 4), invalid_argument);
    CHECK_THROWS_AS(classifier_entropy(pair, 1), invalid_argument);
}

TEST_CASE("classifier selection")
{
    // 1-based column 2 constant, the rest varied
    auto b = make({{1, 4, 2}, {2, 4, 3}, {3, 4, 1}});
    CHECK(select_classifier({b, 0, 3}, 4) == 1);

    auto all_const = make({{1, 2, 3}, {1, 2, 3}});
    CHECK(select_classifier({all_const, 0, 2}, 3) == 0);

    // entropies (1.5, 0.0, ~0.81)
    auto e = make({{1, 2, 1}, {1, 2, 1}, {2, 2, 1}, {3, 2, 2}});
    CHECK(select_classifier({e, 0, 4}, 3) == 1);
}

TEST_CASE("constrained mode")
{
    auto b1 = make({{5, 5}, {5, 7}, {5, 7}});
    CHECK(constrained_mode({b1, 0, 3}, 0) == 5);

    auto b2 = make({{3, 9}, {3, 9}, {3, 9}});
    CHECK(constrained_mode({b2, 0, 3}, 0) == 3);
    CHECK(constrained_mode({b2, 0, 3}, 1) == 9);

    // 2 outnumbers 6 overall but only 6 appears in the selected column
    auto b3 = make({{6, 2, 2}, {6, 2, 2}});
    CHECK(constrained_mode({b3, 0, 2}, 0) == 6);

    // equal counts among candidates go to the smaller label
    auto b4 = make({{4, 2}, {2, 4}});
    CHECK(constrained_mode({b4, 0, 2}, 0) == 2);

    CHECK_THROWS_AS(constrained_mode({b4, 0, 2}, 2), invalid_argument);
}

TEST_CASE("SWIM prediction counts")
{
    auto b = random_matrix(40, 6, 16, 1);
    CHECK(swim(b, 5, 16).prediction_count() == 36);
    CHECK(swim(b, 10, 16).prediction_count() == 31);
    CHECK(swim(b, 1, 16).prediction_count() == 40);
    CHECK(swim(b, 40, 16).prediction_count() == 1);
    CHECK_THROWS_AS(swim(b, 41, 16), invalid_argument);
    CHECK_THROWS_AS(swim(b, 0, 16), invalid_argument);
}

TEST_CASE("SWIM contracts on random matrices")
{
    for (std::uint64_t seed = 0; seed < 30; ++seed)
    {
        const int Q = 2 + int(seed % 5);
        auto b = random_matrix(12, 6, Q, seed);
        for (std::size_t W : {1u, 3u, 5u, 12u})
        {
            auto r = swim(b, W, Q);
            REQUIRE(r.predictions.size() == 12 - W + 1);
            REQUIRE(r.selected.size() == r.predictions.size());
            for (std::size_t u = 0; u < r.predictions.size(); ++u)
            {
                prediction_window w{b, u, W};
                CHECK(r.selected[u] == select_classifier(w, Q));
                auto col = w.column(r.selected[u]);
                CHECK(std::find(col.begin(), col.end(), r.predictions[u]) != col.end());
            }
        }
        CHECK(swim(b, 12, Q).predictions[0] == full_matrix_estimate(b, Q));
    }
}

TEST_CASE("constant matrix and constant-correct column")
{
    auto flat = make(std::vector<std::vector<int>>(8, std::vector<int>(6, 3)), 3);
    auto r = swim(flat, 5, 4);
    for (auto q : r.predictions)
        CHECK(q == 3);
    CHECK(r.prediction_probability == 1.0);

    for (std::uint64_t seed = 0; seed < 20; ++seed)
    {
        auto b = random_matrix(40, 6, 16, 100 + seed);
        const std::size_t col = seed % 6;
        for (std::size_t z = 0; z < 40; ++z)
            b.labels[z * 6 + col] = 9;
        b.true_label = 9;
        for (std::size_t W : {5u, 10u})
            CHECK(swim(b, W, 16).prediction_probability == 1.0);
    }
}

TEST_CASE("column permutation moves the selection, not the prediction")
{
    // Column entropies are distinct: 0, 1, log2(3), 2
    auto b = make({{1, 1, 1, 1}, {1, 2, 2, 2}, {1, 1, 3, 3}, {1, 2, 1, 4}}, 1);
    auto base = swim(b, 4, 4);
    const std::vector<std::size_t> perm = {2, 0, 3, 1};
    prediction_matrix p = b;
    for (std::size_t z = 0; z < 4; ++z)
        for (std::size_t h = 0; h < 4; ++h)
            p.labels[z * 4 + perm[h]] = b.at(z, h);
    auto moved = swim(p, 4, 4);
    CHECK(moved.predictions == base.predictions);
    CHECK(moved.selected[0] == perm[base.selected[0]]);
}

TEST_CASE("prediction probability")
{
    std::vector<int> all = {4, 4, 4}, some = {4, 4, 2, 4}, none = {1, 2};
    CHECK(prediction_probability(all, 4) == 1.0);
    CHECK(prediction_probability(some, 4) == 0.75);
    CHECK(prediction_probability(none, 4) == 0.0);
    CHECK_THROWS_AS(prediction_probability({}, 1), invalid_argument);

    // relabeling other classes leaves the score alone
    std::vector<int> relabeled = {4, 4, 7, 4};
    CHECK(prediction_probability(relabeled, 4) == 0.75);
}

TEST_CASE("streaming SWIM matches the batch result")
{
    auto b = random_matrix(25, 6, 5, 77);
    auto batch = swim(b, 5, 5);
    swim_stream s(5, 6, 5);
    std::vector<int> got;
    std::vector<std::size_t> sel;
    for (std::size_t z = 0; z < b.rows; ++z)
    {
        auto step = s.push(b.row(z));
        CHECK(step.has_value() == (z >= 4));
        if (step)
        {
            got.push_back(step->label);
            sel.push_back(step->selected);
        }
    }
    CHECK(s.rows_seen() == 25);
    CHECK(got == batch.predictions);
    CHECK(sel == batch.selected);

    std::vector<int> short_row = {1, 2};
    CHECK_THROWS_AS(s.push(short_row), invalid_argument);
    CHECK_THROWS_AS(swim_stream(0, 6, 5), invalid_argument);
}

TEST_CASE("fusion record")
{
    auto b = random_matrix(10, 6, 3, 5);
    b.true_label = 2;
    auto r = swim(b, 3, 3);
    auto rec = make_fusion_record(r, 2, 6);
    CHECK(rec.grid == 2);
    CHECK(rec.window_length == 3);
    CHECK(rec.prediction_count == 8);
    CHECK(rec.prediction_probability == r.prediction_probability);
    std::size_t total = 0;
    for (auto c : rec.selection_histogram)
        total += c;
    CHECK(rec.selection_histogram.size() == 6);
    CHECK(total == 8);
}

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
#include <numbers>

#include "goofloc/error.hpp"
#include "goofloc/goof_builder.hpp"
#include "oracles.hpp"

using namespace goofloc;

namespace
{
    double max_abs_diff(const cmatrix &a, const cmatrix &b)
    {
        double d = 0;
        for (std::size_t i = 0; i < a.size(); ++i)
            d = std::max(d, std::abs(a.data()[i] - b.data()[i]));
        return d;
    }

    cmatrix white(std::size_t M, std::size_t L, std::uint64_t seed)
    {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> g(0.0, std::sqrt(0.5));
        cmatrix b(M, L);
        for (auto &z : b.data())
            z = {g(rng), g(rng)};
        return b;
    }

    snapshot_block labelled(cmatrix data, int q)
    {
        snapshot_block b;
        b.data = std::move(data);
        b.grid_label = q;
        return b;
    }
} // namespace

TEST_CASE("covariance examples")
{
    cmatrix y(2, 1);
    y(0, 0) = {1, 0};
    y(1, 0) = {0, 1};
    auto r = est_covariance(y);
    CHECK(std::abs(r(0, 0) - cdouble(1, 0)) < 1e-15);
    CHECK(std::abs(r(0, 1) - cdouble(0, -1)) < 1e-15);
    CHECK(std::abs(r(1, 0) - cdouble(0, 1)) < 1e-15);
    CHECK(std::abs(r(1, 1) - cdouble(1, 0)) < 1e-15);

    auto rss = extract_rss(r);
    CHECK(rss == std::vector<double>{1.0, 1.0});

    auto big = est_covariance(white(3, 100000, 1));
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t k = 0; k < 3; ++k)
            CHECK(std::abs(big(i, k) - cdouble(i == k ? 1.0 : 0.0, 0.0)) < 0.02);

    CHECK_THROWS_AS(est_covariance(cmatrix(3, 0)), invalid_argument);
    CHECK_THROWS_AS(extract_rss(cmatrix(2, 3)), invalid_argument);

    cmatrix d(3, 3);
    d(0, 0) = 1;
    d(1, 1) = 2;
    d(2, 2) = 3;
    CHECK(extract_rss(d) == std::vector<double>{1, 2, 3});
}

TEST_CASE("PSD examples")
{
    const std::size_t L = 16;
    cmatrix tone(2, L);
    for (std::size_t t = 0; t < L; ++t)
        for (std::size_t m = 0; m < 2; ++m)
            tone(m, t) = std::polar(1.0 + double(m), 2.0 * std::numbers::pi * 5.0 * double(t) / double(L));
    auto p = est_psd(tone, 0);
    REQUIRE(p.cols() == L);
    for (std::size_t m = 0; m < 2; ++m)
        for (std::size_t k = 0; k < L; ++k)
            CHECK(p(m, k) == doctest::Approx(k == 5 ? 1.0 : 0.0).epsilon(1e-12));

    // A single periodogram bin of white noise is exponential with mean 1/K, so the largest of
    // 4096 bins sits near ln(4096)/K. The flatness bound is checked on the average of 16
    // independent periodograms, whose bins concentrate around 1/K.
    const std::size_t N = 4096;
    std::vector<double> avg(N, 0.0);
    for (std::uint64_t rep = 0; rep < 16; ++rep)
    {
        auto flat = est_psd(white(2, N, 3 + rep), 0);
        for (std::size_t m = 0; m < 2; ++m)
        {
            double s = 0;
            for (std::size_t k = 0; k < N; ++k)
            {
                s += flat(m, k);
                avg[k] += flat(m, k) / 32.0;
            }
            CHECK(s == doctest::Approx(1.0).epsilon(1e-9));
        }
    }
    double worst = 0;
    for (double v : avg)
        worst = std::max(worst, std::abs(v - 1.0 / N));
    CHECK(worst < 5.0 / N);

    auto y = white(3, 24, 8);
    auto part = est_psd(y, 10);
    auto ref = oracle::psd_by_direct_dft(y, 10);
    for (std::size_t i = 0; i < part.size(); ++i)
        CHECK(part.data()[i] == doctest::Approx(ref.data()[i]).epsilon(1e-10));

    cmatrix dead(2, 8);
    dead(0, 0) = 1.0;
    CHECK_THROWS_AS(est_psd(dead, 0), degenerate_input);
    CHECK_THROWS_AS(est_psd(y, 25), invalid_argument);
}

TEST_CASE("signal subspace examples")
{
    cmatrix d(3, 3);
    d(0, 0) = 5;
    d(1, 1) = 1;
    d(2, 2) = 1;
    auto u = est_signal_subspace(d);
    CHECK(u[0] == doctest::Approx(1.0));
    CHECK(u[1] == doctest::Approx(0.0));
    CHECK(u[2] == doctest::Approx(0.0));

    std::vector<cdouble> a = {1.0, std::polar(1.0, 0.5), std::polar(1.0, 1.0), std::polar(1.0, 1.5)};
    cmatrix r(4, 4);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t k = 0; k < 4; ++k)
            r(i, k) = a[i] * std::conj(a[k]);
    for (double x : est_signal_subspace(r))
        CHECK(x == doctest::Approx(0.5).epsilon(1e-12));

    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 10; ++trial)
    {
        auto cov = est_covariance(oracle::random_block(5, 40, rng));
        auto got = est_signal_subspace(cov);
        auto want = oracle::principal_magnitudes(cov);
        double norm = 0;
        for (std::size_t i = 0; i < 5; ++i)
        {
            CHECK(std::abs(got[i] - want[i]) < 1e-8);
            CHECK(got[i] >= 0.0);
            norm += got[i] * got[i];
        }
        CHECK(std::sqrt(norm) == doctest::Approx(1.0).epsilon(1e-10));
    }
}

TEST_CASE("Jacobi eigen on a real symmetric matrix")
{
    rmatrix a(3, 3);
    a(0, 0) = 2;
    a(1, 1) = 2;
    a(2, 2) = 3;
    a(0, 1) = a(1, 0) = 1;
    auto e = jacobi_eigen(a);
    CHECK(e.values[0] == doctest::Approx(3.0));
    CHECK(e.values[1] == doctest::Approx(3.0));
    CHECK(e.values[2] == doctest::Approx(1.0));
    CHECK_THROWS_AS(jacobi_eigen(rmatrix(2, 3)), invalid_argument);
}

TEST_CASE("fourth-order cumulant examples")
{
    cmatrix ones(2, 10, cdouble(1.0, 0.0));
    auto c = est_foc(ones);
    for (auto z : c.data())
        CHECK(std::abs(z - cdouble(-2.0, 0.0)) < 1e-12);

    auto g = est_foc(white(3, 100000, 6));
    for (auto z : g.data())
        CHECK(std::abs(z) < 0.05);

    // 4-QAM through a fixed mixing matrix
    std::mt19937_64 rng(12);
    std::uniform_int_distribution<int> sym(0, 3);
    const std::size_t L = 500;
    cmatrix s(2, L), mix(3, 2);
    for (auto &z : s.data())
        z = std::polar(1.0, std::numbers::pi / 4 + std::numbers::pi / 2 * sym(rng));
    mix(0, 0) = {1, 0.2};
    mix(1, 0) = {0.3, -0.7};
    mix(2, 0) = {-0.5, 0.1};
    mix(0, 1) = {0.2, 0.9};
    mix(1, 1) = {1.1, 0};
    mix(2, 1) = {0.4, 0.4};
    auto y = oracle::matmul(mix, s);
    CHECK(max_abs_diff(est_foc(y), oracle::foc_slice(y)) < 1e-10);

    CHECK_THROWS_AS(est_foc(cmatrix(2, 0)), invalid_argument);
}

TEST_CASE("FLOM examples")
{
    auto y = white(4, 300, 9);
    CHECK(max_abs_diff(est_flom(y, 2.0), est_covariance(y)) < 1e-12);

    // column k constant c: entry (i, k) = mean(y_i) |c|^(p-2) conj(c)
    cmatrix z = white(2, 50, 10);
    const cdouble c(0.6, -0.8);
    for (std::size_t t = 0; t < 50; ++t)
        z(1, t) = c;
    cdouble mean0 = 0;
    for (std::size_t t = 0; t < 50; ++t)
        mean0 += z(0, t);
    mean0 /= 50.0;
    auto f = est_flom(z, 1.5);
    CHECK(std::abs(f(0, 1) - mean0 * std::pow(std::abs(c), -0.5) * std::conj(c)) < 1e-12);

    // zero samples contribute nothing for p < 2
    cmatrix zero(2, 4);
    zero(0, 0) = 1.0;
    auto fz = est_flom(zero, 1.2);
    for (auto v : fz.data())
        CHECK(std::isfinite(v.real()));
    CHECK(std::abs(fz(0, 0) - cdouble(0.25, 0)) < 1e-15);
    CHECK(std::abs(fz(0, 1)) == 0.0);

    CHECK_THROWS_AS(est_flom(y, 1.0), invalid_argument);
    CHECK_THROWS_AS(est_flom(y, 2.1), invalid_argument);
}

TEST_CASE("vectorize follows the column-major convention")
{
    std::vector<double> rss = {1, 2, 3};
    CHECK(vectorize(rss, fingerprint_kind::rssf) == rss);

    cmatrix r(2, 2);
    r(0, 0) = 1;
    r(0, 1) = {0, -1};
    r(1, 0) = {0, 1};
    r(1, 1) = 1;
    CHECK(vectorize(r, fingerprint_kind::cmf) == std::vector<double>{1, 1, 1, 1});

    rmatrix p(2, 3);
    double v = 1;
    for (std::size_t row = 0; row < 2; ++row)
        for (std::size_t col = 0; col < 3; ++col)
            p(row, col) = v++; // rows (1,2,3), (4,5,6)
    CHECK(vectorize(p, fingerprint_kind::psdf) == std::vector<double>{1, 4, 2, 5, 3, 6});

    std::vector<double> ss = {-0.5, 0.5};
    CHECK(vectorize(ss, fingerprint_kind::ssf) == std::vector<double>{0.5, 0.5});

    CHECK_THROWS_AS(vectorize(r, fingerprint_kind::rssf), invalid_argument);
    CHECK_THROWS_AS(vectorize(p, fingerprint_kind::cmf), invalid_argument);
    CHECK_THROWS_AS(vectorize(rss, fingerprint_kind::focf), invalid_argument);
    CHECK_THROWS_AS(vectorize(cmatrix(2, 3), fingerprint_kind::cmf), invalid_argument);
}

TEST_CASE("fingerprint dimensions and names")
{
    CHECK(fingerprint_dimension(fingerprint_kind::cmf, 7, 32) == 49);
    CHECK(fingerprint_dimension(fingerprint_kind::rssf, 7, 32) == 7);
    CHECK(fingerprint_dimension(fingerprint_kind::psdf, 7, 32) == 224);
    CHECK(fingerprint_dimension(fingerprint_kind::ssf, 7, 32) == 7);
    CHECK(fingerprint_dimension(fingerprint_kind::focf, 7, 32) == 49);
    CHECK(fingerprint_dimension(fingerprint_kind::flomf, 7, 32) == 49);
    for (auto k : all_fingerprint_kinds)
        CHECK(fingerprint_kind_from_string(to_string(k)) == k);
    CHECK_THROWS_AS(fingerprint_kind_from_string("CIR"), invalid_argument);
}

TEST_CASE("build_goof counting and layout")
{
    std::vector<snapshot_block> blocks = {labelled(white(3, 64, 1), 2), labelled(white(3, 64, 2), 1)};
    goof_params params;
    params.group_count = 4;
    auto g = build_goof(blocks, params);
    CHECK(g.sample_count() == 8);
    CHECK(g.grid_labels == std::vector<int>{1, 2});
    CHECK(g.snapshots_per_group == 16);
    CHECK(g.psd_points == 16);
    for (auto k : all_fingerprint_kinds)
    {
        CHECK(g.table(k).labels == std::vector<int>{1, 1, 1, 1, 2, 2, 2, 2});
        CHECK(g.table(k).dimension == fingerprint_dimension(k, 3, 16));
    }
    g.validate();

    // row 1 of every table derives from group 1 of grid 1 (the second block)
    cmatrix group(3, 16);
    for (std::size_t t = 0; t < 16; ++t)
        for (std::size_t m = 0; m < 3; ++m)
            group(m, t) = blocks[1].data(m, 16 + t);
    auto cov = est_covariance(group);
    auto row = g.table(fingerprint_kind::cmf).row(1);
    auto expect = vectorize(cov, fingerprint_kind::cmf);
    for (std::size_t i = 0; i < expect.size(); ++i)
        CHECK(row[i] == doctest::Approx(expect[i]).epsilon(1e-14));

    auto again = build_goof(blocks, params);
    CHECK(again.table(fingerprint_kind::focf).features == g.table(fingerprint_kind::focf).features);

    auto first = g.select_groups(1, 2);
    CHECK(first.group_count == 2);
    CHECK(first.sample_count() == 4);
    CHECK(first.table(fingerprint_kind::rssf).row(0)[0] == g.table(fingerprint_kind::rssf).row(1)[0]);
    auto grid2 = g.select_grid(2);
    CHECK(grid2.grid_labels == std::vector<int>{2});
    CHECK(grid2.sample_count() == 4);
    CHECK_THROWS_AS(g.select_grid(9), invalid_argument);
    CHECK_THROWS_AS(g.select_groups(3, 2), invalid_argument);

    params.group_count = 5;
    CHECK_THROWS_AS(build_goof(blocks, params), invalid_argument);
    params.group_count = 4;
    blocks[0].grid_label = 1;
    CHECK_THROWS_AS(build_goof(blocks, params), invalid_argument);
}

TEST_CASE("protocol group sizes")
{
    // 3200 snapshots in 100 groups of 32; 400 snapshots in 80 groups of 5
    std::vector<snapshot_block> sim = {labelled(white(2, 3200, 5), 1)};
    goof_params a;
    a.group_count = 100;
    auto ga = build_goof(sim, a);
    CHECK(ga.sample_count() == 100);
    CHECK(ga.snapshots_per_group == 32);

    std::vector<snapshot_block> real = {labelled(white(4, 400, 6), 1)};
    goof_params b;
    b.group_count = 80;
    auto gb = build_goof(real, b);
    CHECK(gb.sample_count() == 80);
    CHECK(gb.snapshots_per_group == 5);
}

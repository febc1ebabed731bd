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

#include "goofloc/channel_sim.hpp"
#include "goofloc/error.hpp"
#include "oracles.hpp"

using namespace goofloc;
using std::numbers::pi;

namespace
{
    array_geometry ula(std::size_t m)
    {
        array_geometry g;
        g.num_elements = m;
        return g;
    }

    snapshot_block unit_tone(std::size_t m, std::size_t L, std::uint64_t seed)
    {
        path_set ps;
        ps.paths.push_back({cdouble(1.0, 0.0), 0.0, 0.0});
        rng_engine rng(seed);
        return synthesize_snapshots(ps, ula(m), L, rng);
    }

    cmatrix difference(const cmatrix &a, const cmatrix &b)
    {
        cmatrix d = a;
        for (std::size_t i = 0; i < d.size(); ++i)
            d.data()[i] -= b.data()[i];
        return d;
    }
} // namespace

TEST_CASE("steering vector examples")
{
    for (auto z : steering_vector(0.0, ula(4)))
        CHECK(std::abs(z - cdouble(1.0, 0.0)) < 1e-15);

    auto a = steering_vector(pi / 2, ula(2));
    CHECK(std::abs(a[1] - cdouble(-1.0, 0.0)) < 1e-12);

    auto b = steering_vector(pi / 6, ula(3));
    CHECK(std::abs(b[2] - std::polar(1.0, -pi)) < 1e-12);

    for (auto z : steering_vector(0.7, ula(8)))
        CHECK(std::abs(z) == doctest::Approx(1.0).epsilon(1e-15));

    auto g = ula(3);
    g.element_pattern = [](std::size_t m, double) { return cdouble(double(m + 1), 0.0); };
    auto c = steering_vector(0.3, g);
    CHECK(std::abs(c[2]) == doctest::Approx(3.0));

    CHECK_THROWS_AS(steering_vector(std::nan(""), ula(4)), invalid_argument);
    CHECK_THROWS_AS(steering_vector(0.0, ula(1)), invalid_argument);
}

TEST_CASE("geometry to channel")
{
    scenario room;
    room.room_width = 8;
    room.room_height = 8;
    room.array_position = {0.0, 4.0};
    room.array_normal = {1.0, 0.0};
    room.grid_positions = {{3.0, 4.0}};

    auto on_axis = geometry_to_channel({3.0, 4.0}, room);
    CHECK(on_axis.aoa == doctest::Approx(0.0));
    CHECK(on_axis.delay == doctest::Approx(3.0 / speed_of_light));
    CHECK(on_axis.delay == doctest::Approx(1.0007e-8).epsilon(1e-4));

    auto broadside = geometry_to_channel({0.0, 7.0}, room);
    CHECK(std::abs(broadside.aoa) == doctest::Approx(pi / 2));

    auto corner = scenario::rectangular(8, 8, 4, 4);
    CHECK(geometry_to_channel({8.0, 8.0}, corner).aoa == doctest::Approx(0.0));

    CHECK_THROWS_AS(geometry_to_channel({0.0, 4.0}, room), degenerate_geometry);
    CHECK_THROWS_AS(geometry_to_channel({9.0, 4.0}, room), invalid_argument);
}

TEST_CASE("rectangular scenario labels run row by row")
{
    auto s = scenario::rectangular(8, 8, 4, 4);
    REQUIRE(s.grid_count() == 16);
    CHECK(s.grid_positions[0].x == doctest::Approx(1.0));
    CHECK(s.grid_positions[0].y == doctest::Approx(1.0));
    CHECK(s.grid_positions[1].x == doctest::Approx(3.0));
    CHECK(s.grid_positions[4].y == doctest::Approx(3.0));
    CHECK_THROWS_AS(scenario::rectangular(8, 8, 0, 4), invalid_argument);
}

TEST_CASE("generated paths follow the spread moments and are power normalized")
{
    rng_engine rng(11);
    auto ps = generate_paths(0.2, 2e-8, 0.1, 2e-9, 20000, rng);
    double mean_aoa = 0, power = 0;
    for (const auto &p : ps.paths)
    {
        mean_aoa += p.aoa;
        power += std::norm(p.gain);
    }
    mean_aoa /= double(ps.paths.size());
    double var = 0;
    for (const auto &p : ps.paths)
        var += (p.aoa - mean_aoa) * (p.aoa - mean_aoa);
    var /= double(ps.paths.size());
    CHECK(power == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(mean_aoa == doctest::Approx(0.2).epsilon(0.01));
    CHECK(std::sqrt(var) == doctest::Approx(0.1).epsilon(0.02));

    rng_engine r2(1);
    auto zero = generate_paths(0.4, 1e-8, 0.0, 0.0, 3, r2);
    for (const auto &p : zero.paths)
    {
        CHECK(p.aoa == 0.4);
        CHECK(p.delay == 1e-8);
    }
    CHECK_THROWS_AS(generate_paths(0, 0, 0, 0, 0, r2), invalid_argument);
    CHECK_THROWS_AS(generate_paths(0, 0, -1, 0, 5, r2), invalid_argument);
}

TEST_CASE("noiseless blocks are rank one")
{
    auto check_rank_one = [](const cmatrix &y)
    {
        std::vector<cdouble> y0(y.col(0).begin(), y.col(0).end());
        double n0 = oracle::vnorm(y0);
        for (std::size_t t = 1; t < y.cols(); ++t)
        {
            cdouble proj = 0;
            for (std::size_t m = 0; m < y.rows(); ++m)
                proj += std::conj(y0[m]) * y(m, t);
            proj /= n0 * n0;
            std::vector<cdouble> r(y.rows());
            for (std::size_t m = 0; m < y.rows(); ++m)
                r[m] = y(m, t) - proj * y0[m];
            std::vector<cdouble> yt(y.col(t).begin(), y.col(t).end());
            CHECK(oracle::vnorm(r) < 1e-10 * oracle::vnorm(yt));
        }
    };

    // one path on the normal: identical columns up to the source sample
    auto b = unit_tone(4, 32, 3);
    for (std::size_t t = 0; t < 32; ++t)
        for (std::size_t m = 1; m < 4; ++m)
            CHECK(std::abs(b.data(m, t) - b.data(0, t)) < 1e-14);
    check_rank_one(b.data);
    CHECK(b.signal_power == doctest::Approx(1.0));

    path_set two;
    two.paths = {{cdouble(0.8, 0.1), 0.3, 1e-8}, {cdouble(-0.2, 0.5), -0.6, 2e-8}};
    rng_engine rng(5);
    check_rank_one(synthesize_snapshots(two, ula(7), 64, rng).data);

    rng_engine r3(9);
    auto many = generate_paths(0.1, 1e-8, 0.4, 1e-9, 20, r3);
    check_rank_one(synthesize_snapshots(many, ula(7), 64, r3).data);
}

TEST_CASE("per-element power matches the path power on average")
{
    rng_engine rng(21);
    double acc = 0;
    const int trials = 3000;
    for (int i = 0; i < trials; ++i)
    {
        auto ps = generate_paths(0.0, 2e-8, 0.4, 2e-9, 20, rng);
        acc += synthesize_snapshots(ps, ula(4), 8, rng).signal_power;
    }
    CHECK(acc / trials == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("noise calibration")
{
    const std::size_t L = 10000;
    auto clean = unit_tone(2, L, 1);

    noise_spec off;
    rng_engine r0(1);
    CHECK(add_noise(clean, off, r0).data == clean.data);

    noise_spec g{noise_kind::gaussian, 0.0};
    rng_engine r1(2);
    auto noisy = add_noise(clean, g, r1);
    CHECK(noisy.noise == noise_kind::gaussian);
    CHECK(noisy.snr_db == 0.0);
    auto n = difference(noisy.data, clean.data);
    double var = 0;
    for (auto z : n.data())
        var += std::norm(z);
    var /= double(n.size());
    CHECK(var == doctest::Approx(1.0).epsilon(0.05));

    for (double snr : {-10.0, 6.0, 30.0})
    {
        noise_spec s{noise_kind::gaussian, snr};
        rng_engine r(7);
        auto d = difference(add_noise(clean, s, r).data, clean.data);
        double p = 0;
        for (auto z : d.data())
            p += std::norm(z);
        p /= double(d.size());
        CHECK(std::abs(10.0 * std::log10(clean.signal_power / p) - snr) < 0.5);
    }

    // identical seeds, identical bits
    rng_engine ra(99), rb(99);
    noise_spec imp{noise_kind::impulse, 10.0};
    CHECK(add_noise(clean, imp, ra).data == add_noise(clean, imp, rb).data);

    noise_spec none{noise_kind::none, 0.0};
    CHECK_THROWS_AS(add_noise(clean, none, r0), invalid_argument);
    noise_spec bad_alpha{noise_kind::impulse, 0.0};
    bad_alpha.alpha = 2.5;
    CHECK_THROWS_AS(add_noise(clean, bad_alpha, r0), invalid_argument);
}

TEST_CASE("color noise carries the length-5 rectangular FIR signature")
{
    const std::size_t L = 100000;
    auto clean = unit_tone(2, L, 4);
    noise_spec c{noise_kind::color, 0.0};
    rng_engine rng(8);
    auto n = difference(add_noise(clean, c, rng).data, clean.data);
    auto r = [&](std::size_t lag)
    {
        cdouble acc = 0;
        for (std::size_t t = lag; t < L; ++t)
            acc += n(0, t) * std::conj(n(0, t - lag));
        return acc.real() / double(L - lag);
    };
    double r0 = r(0);
    CHECK(r0 == doctest::Approx(1.0).epsilon(0.05));
    CHECK(r(1) / r0 == doctest::Approx(0.8).epsilon(0.05));
    CHECK(r(1) > 0.0);
    CHECK(std::abs(r(5) / r0) < 0.05);
}

TEST_CASE("alpha = 2 stable draws are Gaussian")
{
    rng_engine rng(31);
    std::vector<double> x(10000);
    for (auto &v : x)
        v = sample_stable(2.0, 0.0, 1.0, 0.0, rng);
    // S(2, 0, c, 0) is N(0, 2 c^2)
    CHECK(oracle::ks_statistic(x, std::sqrt(2.0)) < oracle::ks_critical_1pct);

    // the same through add_noise: dispersion 1 per quadrature at 0 dB on a unit-power block
    auto clean = unit_tone(2, 5000, 2);
    noise_spec imp{noise_kind::impulse, 0.0};
    imp.alpha = 2.0;
    auto d = difference(add_noise(clean, imp, rng).data, clean.data);
    std::vector<double> re;
    for (auto z : d.data())
        re.push_back(z.real());
    CHECK(oracle::ks_statistic(re, std::sqrt(2.0)) < oracle::ks_critical_1pct);

    // a heavy tail is rejected by the same statistic
    std::vector<double> heavy(10000);
    for (auto &v : heavy)
        v = sample_stable(1.0, 0.0, 1.0, 0.0, rng);
    CHECK(oracle::ks_statistic(heavy, std::sqrt(2.0)) > oracle::ks_critical_1pct);
}

TEST_CASE("noise kind names round-trip")
{
    for (auto k : {noise_kind::none, noise_kind::gaussian, noise_kind::color, noise_kind::impulse})
        CHECK(noise_kind_from_string(to_string(k)) == k);
    CHECK_THROWS_AS(noise_kind_from_string("pink"), invalid_argument);
}

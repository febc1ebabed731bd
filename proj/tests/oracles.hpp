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

// Brute-force reference computations used to check the library estimators. Each one is
// written the slow, obvious way on purpose.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>
#include <random>
#include <vector>

#include "goofloc/matrix.hpp"

namespace oracle
{
    using goofloc::cdouble;
    using goofloc::cmatrix;
    using goofloc::rmatrix;

    inline cmatrix random_block(std::size_t M, std::size_t L, std::mt19937_64 &rng)
    {
        std::normal_distribution<double> g(0.0, 1.0);
        std::uniform_real_distribution<double> gain(0.2, 3.0);
        cmatrix b(M, L);
        std::vector<double> scale(M);
        for (auto &s : scale)
            s = gain(rng);
        for (std::size_t t = 0; t < L; ++t)
            for (std::size_t m = 0; m < M; ++m)
                b(m, t) = scale[m] * cdouble(g(rng), g(rng));
        return b;
    }

    inline std::vector<cdouble> matvec(const cmatrix &a, const std::vector<cdouble> &x)
    {
        std::vector<cdouble> y(a.rows());
        for (std::size_t r = 0; r < a.rows(); ++r)
            for (std::size_t c = 0; c < a.cols(); ++c)
                y[r] += a(r, c) * x[c];
        return y;
    }

    inline cmatrix matmul(const cmatrix &a, const cmatrix &b)
    {
        cmatrix c(a.rows(), b.cols());
        for (std::size_t j = 0; j < b.cols(); ++j)
            for (std::size_t k = 0; k < a.cols(); ++k)
                for (std::size_t i = 0; i < a.rows(); ++i)
                    c(i, j) += a(i, k) * b(k, j);
        return c;
    }

    inline double vnorm(const std::vector<cdouble> &x)
    {
        double s = 0.0;
        for (auto z : x)
            s += std::norm(z);
        return std::sqrt(s);
    }

    // Principal eigenvector magnitudes of a Hermitian PSD matrix. Repeated squaring
    // (R^(2^k), renormalized) amplifies the eigen-gap before a final power iteration.
    inline std::vector<double> principal_magnitudes(const cmatrix &R)
    {
        const std::size_t n = R.rows();
        cmatrix P = R;
        for (int k = 0; k < 40; ++k)
        {
            P = matmul(P, P);
            double mx = 0.0;
            for (auto z : P.data())
                mx = std::max(mx, std::abs(z));
            if (mx == 0.0)
                break;
            for (auto &z : P.data())
                z /= mx;
        }
        std::vector<cdouble> x(n);
        for (std::size_t i = 0; i < n; ++i)
            x[i] = cdouble(1.0 + 0.1 * double(i), 0.3 - 0.05 * double(i));
        for (int it = 0; it < 200; ++it)
        {
            x = matvec(P, x);
            double nx = vnorm(x);
            for (auto &z : x)
                z /= nx;
            x = matvec(R, x);
            nx = vnorm(x);
            for (auto &z : x)
                z /= nx;
        }
        std::vector<double> out(n);
        for (std::size_t i = 0; i < n; ++i)
            out[i] = std::abs(x[i]);
        return out;
    }

    inline double largest_eigenvalue(const cmatrix &R)
    {
        std::vector<cdouble> x(R.rows());
        for (std::size_t i = 0; i < x.size(); ++i)
            x[i] = cdouble(1.0, 0.1 * double(i));
        for (int it = 0; it < 2000; ++it)
        {
            x = matvec(R, x);
            double nx = vnorm(x);
            if (nx == 0.0)
                return 0.0;
            for (auto &z : x)
                z /= nx;
        }
        auto y = matvec(R, x);
        cdouble q = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i)
            q += std::conj(x[i]) * y[i];
        return q.real();
    }

    // Cholesky of R + shift*I; succeeds iff R + shift*I is positive definite
    inline bool cholesky_succeeds(const cmatrix &R, double shift)
    {
        const std::size_t n = R.rows();
        cmatrix Lm(n, n);
        for (std::size_t j = 0; j < n; ++j)
        {
            double d = R(j, j).real() + shift;
            for (std::size_t k = 0; k < j; ++k)
                d -= std::norm(Lm(j, k));
            if (!(d > 0.0))
                return false;
            Lm(j, j) = std::sqrt(d);
            for (std::size_t i = j + 1; i < n; ++i)
            {
                cdouble s = R(i, j);
                for (std::size_t k = 0; k < j; ++k)
                    s -= Lm(i, k) * std::conj(Lm(j, k));
                Lm(i, j) = s / Lm(j, j).real();
            }
        }
        return true;
    }

    // Fourth-order sample cumulant cum(y_a, y_b, y_c*, y_d*) of zero-mean data from raw
    // sample moments, one time loop per moment
    inline cdouble cumulant4(const cmatrix &y, std::size_t a, std::size_t b, std::size_t c, std::size_t d)
    {
        const std::size_t L = y.cols();
        auto mean = [&](auto f)
        {
            cdouble s = 0.0;
            for (std::size_t t = 0; t < L; ++t)
                s += f(t);
            return s / double(L);
        };
        auto x1 = [&](std::size_t t) { return y(a, t); };
        auto x2 = [&](std::size_t t) { return y(b, t); };
        auto x3 = [&](std::size_t t) { return std::conj(y(c, t)); };
        auto x4 = [&](std::size_t t) { return std::conj(y(d, t)); };
        cdouble m1234 = mean([&](std::size_t t) { return x1(t) * x2(t) * x3(t) * x4(t); });
        cdouble m12 = mean([&](std::size_t t) { return x1(t) * x2(t); });
        cdouble m34 = mean([&](std::size_t t) { return x3(t) * x4(t); });
        cdouble m13 = mean([&](std::size_t t) { return x1(t) * x3(t); });
        cdouble m24 = mean([&](std::size_t t) { return x2(t) * x4(t); });
        cdouble m14 = mean([&](std::size_t t) { return x1(t) * x4(t); });
        cdouble m23 = mean([&](std::size_t t) { return x2(t) * x3(t); });
        return m1234 - m12 * m34 - m13 * m24 - m14 * m23;
    }

    // The (i, k, i, k) slice of the cumulant tensor
    inline cmatrix foc_slice(const cmatrix &y)
    {
        const std::size_t M = y.rows();
        cmatrix out(M, M);
        for (std::size_t i = 0; i < M; ++i)
            for (std::size_t k = 0; k < M; ++k)
                out(i, k) = cumulant4(y, i, k, i, k);
        return out;
    }

    // |DFT|^2 with the 1/L prefactor, first K bins, each row normalized
    inline rmatrix psd_by_direct_dft(const cmatrix &y, std::size_t K)
    {
        const std::size_t M = y.rows(), L = y.cols();
        rmatrix out(M, K);
        for (std::size_t m = 0; m < M; ++m)
        {
            double total = 0.0;
            for (std::size_t k = 0; k < K; ++k)
            {
                cdouble s = 0.0;
                for (std::size_t t = 0; t < L; ++t)
                    s += y(m, t) * std::polar(1.0, -2.0 * std::numbers::pi * double(k * t % L) / double(L));
                out(m, k) = std::norm(s / double(L));
                total += out(m, k);
            }
            for (std::size_t k = 0; k < K; ++k)
                out(m, k) /= total;
        }
        return out;
    }

    inline double normal_cdf(double x, double sigma)
    {
        return 0.5 * std::erfc(-x / (sigma * std::numbers::sqrt2));
    }

    // Two-sided Kolmogorov-Smirnov statistic sqrt(n) * D against N(0, sigma^2)
    inline double ks_statistic(std::vector<double> x, double sigma)
    {
        std::sort(x.begin(), x.end());
        const double n = double(x.size());
        double d = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i)
        {
            double f = normal_cdf(x[i], sigma);
            d = std::max({d, f - double(i) / n, double(i + 1) / n - f});
        }
        return std::sqrt(n) * d;
    }

    // Asymptotic critical value of sqrt(n) * D at the 1% level
    inline constexpr double ks_critical_1pct = 1.628;

    inline std::vector<double> average_ranks(const std::vector<double> &v)
    {
        std::vector<std::size_t> idx(v.size());
        std::iota(idx.begin(), idx.end(), std::size_t(0));
        std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v[a] < v[b]; });
        std::vector<double> r(v.size());
        for (std::size_t i = 0; i < idx.size();)
        {
            std::size_t j = i;
            while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]])
                ++j;
            double avg = 0.5 * double(i + j) + 1.0;
            for (std::size_t k = i; k <= j; ++k)
                r[idx[k]] = avg;
            i = j + 1;
        }
        return r;
    }

    // Spearman rank correlation with average ranks for ties (Pearson on ranks)
    inline double spearman(const std::vector<double> &x, const std::vector<double> &y)
    {
        auto rx = average_ranks(x), ry = average_ranks(y);
        const double n = double(x.size());
        double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
        double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
        double sxy = 0, sxx = 0, syy = 0;
        for (std::size_t i = 0; i < rx.size(); ++i)
        {
            sxy += (rx[i] - mx) * (ry[i] - my);
            sxx += (rx[i] - mx) * (rx[i] - mx);
            syy += (ry[i] - my) * (ry[i] - my);
        }
        if (sxx == 0 || syy == 0)
            return 0.0;
        return sxy / std::sqrt(sxx * syy);
    }

} // namespace oracle

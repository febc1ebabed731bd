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

#include "goofloc/goof_builder.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <string>

#include <fftw3.h>

#include "goofloc/error.hpp"

namespace goofloc
{
    namespace
    {
        // FFTW's planner is not re-entrant
        std::mutex &fftw_planner_mutex()
        {
            static std::mutex m;
            return m;
        }

        void require_nonempty(const cmatrix &block, const char *who)
        {
            if (block.rows() == 0 || block.cols() == 0)
                throw invalid_argument(std::string(who) + ": empty snapshot block");
        }

        void require_square(const cmatrix &m, const char *who)
        {
            if (m.rows() != m.cols() || m.rows() == 0)
                throw invalid_argument(std::string(who) + ": matrix must be square and non-empty");
        }

        cmatrix column_range(const cmatrix &block, std::size_t first, std::size_t count)
        {
            cmatrix out(block.rows(), count);
            for (std::size_t t = 0; t < count; ++t)
                std::copy_n(block.col(first + t).begin(), block.rows(), out.col(t).begin());
            return out;
        }
    } // namespace

    std::string_view to_string(fingerprint_kind kind)
    {
        switch (kind)
        {
        case fingerprint_kind::cmf:
            return "CMF";
        case fingerprint_kind::rssf:
            return "RSSF";
        case fingerprint_kind::psdf:
            return "PSDF";
        case fingerprint_kind::ssf:
            return "SSF";
        case fingerprint_kind::focf:
            return "FoCF";
        case fingerprint_kind::flomf:
            return "FLOMF";
        }
        return "unknown";
    }

    fingerprint_kind fingerprint_kind_from_string(std::string_view name)
    {
        for (auto k : all_fingerprint_kinds)
            if (to_string(k) == name)
                return k;
        throw invalid_argument("unknown fingerprint kind '" + std::string(name) + "'");
    }

    std::size_t fingerprint_dimension(fingerprint_kind kind, std::size_t elements, std::size_t psd_points)
    {
        switch (kind)
        {
        case fingerprint_kind::cmf:
        case fingerprint_kind::focf:
        case fingerprint_kind::flomf:
            return elements * elements;
        case fingerprint_kind::psdf:
            return elements * psd_points;
        case fingerprint_kind::rssf:
        case fingerprint_kind::ssf:
            return elements;
        }
        return 0;
    }

    void fingerprint_table::append(std::span<const double> f, int label)
    {
        if (f.size() != dimension)
            throw invalid_argument("fingerprint_table: feature length " + std::to_string(f.size()) +
                                   " does not match dimension " + std::to_string(dimension));
        features.insert(features.end(), f.begin(), f.end());
        labels.push_back(label);
    }

    // ---------------------------------------------------------------------------------------------
    // Estimators

    cmatrix est_covariance(const cmatrix &block)
    {
        require_nonempty(block, "est_covariance");
        const std::size_t M = block.rows(), L = block.cols();
        cmatrix R(M, M);
        for (std::size_t t = 0; t < L; ++t)
        {
            auto y = block.col(t);
            for (std::size_t k = 0; k < M; ++k)
            {
                cdouble yk = std::conj(y[k]);
                for (std::size_t i = 0; i < M; ++i)
                    R(i, k) += y[i] * yk;
            }
        }
        const double inv = 1.0 / double(L);
        for (auto &v : R.data())
            v *= inv;
        // Exact Hermitian symmetry regardless of summation order
        for (std::size_t k = 0; k < M; ++k)
        {
            R(k, k) = {R(k, k).real(), 0.0};
            for (std::size_t i = k + 1; i < M; ++i)
                R(k, i) = std::conj(R(i, k));
        }
        return R;
    }

    std::vector<double> extract_rss(const cmatrix &covariance)
    {
        require_square(covariance, "extract_rss");
        std::vector<double> rss(covariance.rows());
        for (std::size_t i = 0; i < rss.size(); ++i)
            rss[i] = covariance(i, i).real();
        return rss;
    }

    rmatrix est_psd(const cmatrix &block, std::size_t psd_points)
    {
        require_nonempty(block, "est_psd");
        const std::size_t M = block.rows(), L = block.cols();
        const std::size_t K = psd_points == 0 ? L : psd_points;
        if (K > L)
            throw invalid_argument("est_psd: psd_points must not exceed the snapshot count");

        // Each element's series is strided by M in the column-major block
        std::vector<cdouble> in(block.data().begin(), block.data().end());
        std::vector<cdouble> out(M * L);
        fftw_plan plan;
        {
            std::lock_guard lock(fftw_planner_mutex());
            int n = int(L);
            plan = fftw_plan_many_dft(1, &n, int(M),
                                      reinterpret_cast<fftw_complex *>(in.data()), nullptr, int(M), 1,
                                      reinterpret_cast<fftw_complex *>(out.data()), nullptr, 1, int(L),
                                      FFTW_FORWARD, FFTW_ESTIMATE);
        }
        if (plan == nullptr)
            throw numerical_failure("est_psd: FFT planning failed");
        fftw_execute(plan);
        {
            std::lock_guard lock(fftw_planner_mutex());
            fftw_destroy_plan(plan);
        }

        rmatrix psd(M, K);
        const double inv_l = 1.0 / double(L);
        for (std::size_t m = 0; m < M; ++m)
        {
            double total = 0.0;
            for (std::size_t k = 0; k < K; ++k)
            {
                psd(m, k) = std::norm(out[m * L + k] * inv_l);
                total += psd(m, k);
            }
            if (!(total > 0.0) || !std::isfinite(total))
                throw degenerate_input("est_psd: element " + std::to_string(m + 1) + " has no spectral power");
            for (std::size_t k = 0; k < K; ++k)
                psd(m, k) /= total;
        }
        return psd;
    }

    symmetric_eigen jacobi_eigen(const rmatrix &a_in, double tol, std::size_t max_sweeps)
    {
        const std::size_t n = a_in.rows();
        if (n == 0 || a_in.cols() != n)
            throw invalid_argument("jacobi_eigen: matrix must be square and non-empty");

        rmatrix a = a_in;
        rmatrix v(n, n);
        for (std::size_t i = 0; i < n; ++i)
            v(i, i) = 1.0;

        double frob = 0.0;
        for (double x : a.data())
        {
            if (!std::isfinite(x))
                throw numerical_failure("jacobi_eigen: non-finite matrix entry");
            frob += x * x;
        }
        frob = std::sqrt(frob);

        auto off_norm = [&]
        {
            double s = 0.0;
            for (std::size_t c = 0; c < n; ++c)
                for (std::size_t r = 0; r < n; ++r)
                    if (r != c)
                        s += a(r, c) * a(r, c);
            return std::sqrt(s);
        };

        bool converged = frob == 0.0 || off_norm() <= tol * frob;
        for (std::size_t sweep = 0; sweep < max_sweeps && !converged; ++sweep)
        {
            for (std::size_t p = 0; p + 1 < n; ++p)
                for (std::size_t q = p + 1; q < n; ++q)
                {
                    double apq = a(p, q);
                    if (apq == 0.0)
                        continue;
                    double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                    double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                    double c = 1.0 / std::sqrt(t * t + 1.0);
                    double s = t * c;

                    for (std::size_t k = 0; k < n; ++k)
                    {
                        double akp = a(k, p), akq = a(k, q);
                        a(k, p) = c * akp - s * akq;
                        a(k, q) = s * akp + c * akq;
                    }
                    for (std::size_t k = 0; k < n; ++k)
                    {
                        double apk = a(p, k), aqk = a(q, k);
                        a(p, k) = c * apk - s * aqk;
                        a(q, k) = s * apk + c * aqk;
                    }
                    for (std::size_t k = 0; k < n; ++k)
                    {
                        double vkp = v(k, p), vkq = v(k, q);
                        v(k, p) = c * vkp - s * vkq;
                        v(k, q) = s * vkp + c * vkq;
                    }
                }
            converged = off_norm() <= tol * frob;
        }
        if (!converged)
            throw numerical_failure("jacobi_eigen: no convergence within " + std::to_string(max_sweeps) + " sweeps");

        std::vector<std::size_t> order(n);
        for (std::size_t i = 0; i < n; ++i)
            order[i] = i;
        std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y)
                         { return a(x, x) > a(y, y); });

        symmetric_eigen out;
        out.values.resize(n);
        out.vectors = rmatrix(n, n);
        for (std::size_t i = 0; i < n; ++i)
        {
            out.values[i] = a(order[i], order[i]);
            for (std::size_t r = 0; r < n; ++r)
                out.vectors(r, i) = v(r, order[i]);
        }
        return out;
    }

    std::vector<double> est_signal_subspace(const cmatrix &covariance)
    {
        require_square(covariance, "est_signal_subspace");
        const std::size_t M = covariance.rows();

        // Real symmetric embedding [Re -Im; Im Re]; every eigenvalue appears twice and any
        // vector [x; y] of the top pair maps back to a phase rotation of u = x + jy.
        rmatrix emb(2 * M, 2 * M);
        for (std::size_t c = 0; c < M; ++c)
            for (std::size_t r = 0; r < M; ++r)
            {
                const cdouble z = covariance(r, c);
                emb(r, c) = z.real();
                emb(r + M, c + M) = z.real();
                emb(r + M, c) = z.imag();
                emb(r, c + M) = -z.imag();
            }
        // Symmetrize against round-off in the caller's matrix
        for (std::size_t c = 0; c < 2 * M; ++c)
            for (std::size_t r = c + 1; r < 2 * M; ++r)
            {
                double avg = 0.5 * (emb(r, c) + emb(c, r));
                emb(r, c) = avg;
                emb(c, r) = avg;
            }

        auto eig = jacobi_eigen(emb);
        std::vector<double> u(M);
        double norm = 0.0;
        for (std::size_t m = 0; m < M; ++m)
        {
            u[m] = std::hypot(eig.vectors(m, 0), eig.vectors(m + M, 0));
            norm += u[m] * u[m];
        }
        norm = std::sqrt(norm);
        if (!(norm > 0.0))
            throw numerical_failure("est_signal_subspace: zero principal eigenvector");
        for (auto &x : u)
            x /= norm;
        return u;
    }

    cmatrix est_foc(const cmatrix &block)
    {
        require_nonempty(block, "est_foc");
        const std::size_t M = block.rows(), L = block.cols();
        const double inv = 1.0 / double(L);

        std::vector<double> power(M, 0.0);
        for (std::size_t t = 0; t < L; ++t)
            for (std::size_t m = 0; m < M; ++m)
                power[m] += std::norm(block(m, t));
        for (auto &p : power)
            p *= inv;

        // cum{y_i, y_k, y_i*, y_k*}
        //   = E|y_i|^2|y_k|^2 - E|y_i|^2 E|y_k|^2 - |E y_i y_k*|^2 - |E y_i y_k|^2
        cmatrix C(M, M);
        for (std::size_t k = 0; k < M; ++k)
            for (std::size_t i = 0; i < M; ++i)
            {
                double m4 = 0.0;
                cdouble cross(0.0, 0.0), pseudo(0.0, 0.0);
                for (std::size_t t = 0; t < L; ++t)
                {
                    const cdouble yi = block(i, t), yk = block(k, t);
                    m4 += std::norm(yi) * std::norm(yk);
                    cross += yi * std::conj(yk);
                    pseudo += yi * yk;
                }
                m4 *= inv;
                cross *= inv;
                pseudo *= inv;
                C(i, k) = {m4 - power[i] * power[k] - std::norm(cross) - std::norm(pseudo), 0.0};
            }
        return C;
    }

    cmatrix est_flom(const cmatrix &block, double p)
    {
        require_nonempty(block, "est_flom");
        if (!(p > 1.0 && p <= 2.0))
            throw invalid_argument("est_flom: p must lie in (1, 2]");
        const std::size_t M = block.rows(), L = block.cols();

        // Per-snapshot weight |y_k|^(p-2) y_k*, zero where y_k vanishes
        cmatrix weighted(M, L);
        for (std::size_t t = 0; t < L; ++t)
            for (std::size_t k = 0; k < M; ++k)
            {
                const cdouble yk = block(k, t);
                const double mag = std::abs(yk);
                if (mag == 0.0)
                    weighted(k, t) = 0.0;
                else if (p == 2.0)
                    weighted(k, t) = std::conj(yk);
                else
                    weighted(k, t) = std::pow(mag, p - 2.0) * std::conj(yk);
            }

        cmatrix F(M, M);
        for (std::size_t t = 0; t < L; ++t)
            for (std::size_t k = 0; k < M; ++k)
            {
                const cdouble w = weighted(k, t);
                for (std::size_t i = 0; i < M; ++i)
                    F(i, k) += block(i, t) * w;
            }
        const double inv = 1.0 / double(L);
        for (auto &v : F.data())
            v *= inv;
        if (p == 2.0)
        {
            for (std::size_t k = 0; k < M; ++k)
            {
                F(k, k) = {F(k, k).real(), 0.0};
                for (std::size_t i = k + 1; i < M; ++i)
                    F(k, i) = std::conj(F(i, k));
            }
        }
        return F;
    }

    // ---------------------------------------------------------------------------------------------
    // Real-valued transforms (column-major reshape, magnitude where the family is complex)

    std::vector<double> vectorize(const cmatrix &m, fingerprint_kind kind)
    {
        if (kind != fingerprint_kind::cmf && kind != fingerprint_kind::focf && kind != fingerprint_kind::flomf)
            throw invalid_argument("vectorize: complex matrix input only applies to CMF, FoCF and FLOMF");
        if (m.rows() != m.cols() || m.empty())
            throw invalid_argument("vectorize: expected a square M x M matrix");
        std::vector<double> out(m.size());
        std::transform(m.data().begin(), m.data().end(), out.begin(), [](cdouble z)
                       { return std::abs(z); });
        return out;
    }

    std::vector<double> vectorize(const rmatrix &m, fingerprint_kind kind)
    {
        if (kind != fingerprint_kind::psdf)
            throw invalid_argument("vectorize: real matrix input only applies to PSDF");
        if (m.empty())
            throw invalid_argument("vectorize: empty PSD matrix");
        return {m.data().begin(), m.data().end()};
    }

    std::vector<double> vectorize(std::span<const double> v, fingerprint_kind kind)
    {
        if (v.empty())
            throw invalid_argument("vectorize: empty vector");
        if (kind == fingerprint_kind::rssf)
            return {v.begin(), v.end()};
        if (kind == fingerprint_kind::ssf)
        {
            std::vector<double> out(v.size());
            std::transform(v.begin(), v.end(), out.begin(), [](double x)
                           { return std::abs(x); });
            return out;
        }
        throw invalid_argument("vectorize: vector input only applies to RSSF and SSF");
    }

    // ---------------------------------------------------------------------------------------------

    fingerprint_sample goof::sample(fingerprint_kind k, std::size_t row) const
    {
        const auto &t = table(k);
        if (row >= t.rows())
            throw invalid_argument("goof::sample: row out of range");
        auto r = t.row(row);
        return {k, {r.begin(), r.end()}, t.labels[row]};
    }

    void goof::validate() const
    {
        const std::size_t rows = grid_labels.size() * group_count;
        for (auto k : all_fingerprint_kinds)
        {
            const auto &t = table(k);
            if (t.kind != k)
                throw invalid_argument("goof: table kind mismatch");
            if (t.dimension != fingerprint_dimension(k, elements, psd_points))
                throw invalid_argument("goof: " + std::string(to_string(k)) + " dimension mismatch");
            if (t.rows() != rows || t.features.size() != rows * t.dimension)
                throw invalid_argument("goof: " + std::string(to_string(k)) + " must hold group_count samples per grid");
            for (std::size_t r = 0; r < rows; ++r)
                if (t.labels[r] != grid_labels[r / group_count])
                    throw invalid_argument("goof: label inconsistent with grid order");
            for (double x : t.features)
                if (!std::isfinite(x))
                    throw numerical_failure("goof: non-finite feature in " + std::string(to_string(k)));
        }
    }

    goof goof::select_groups(std::span<const std::size_t> groups) const
    {
        for (auto g : groups)
            if (g >= group_count)
                throw invalid_argument("goof::select_groups: group index " + std::to_string(g) + " out of range");
        goof out = *this;
        out.group_count = groups.size();
        for (auto k : all_fingerprint_kinds)
        {
            const auto &src = table(k);
            auto &dst = out.table(k);
            dst.features.clear();
            dst.labels.clear();
            dst.features.reserve(grid_labels.size() * groups.size() * src.dimension);
            for (std::size_t q = 0; q < grid_labels.size(); ++q)
                for (auto g : groups)
                    dst.append(src.row(q * group_count + g), src.labels[q * group_count + g]);
        }
        return out;
    }

    goof goof::select_groups(std::size_t first, std::size_t count) const
    {
        if (first + count > group_count)
            throw invalid_argument("goof::select_groups: range exceeds group_count");
        std::vector<std::size_t> idx(count);
        for (std::size_t i = 0; i < count; ++i)
            idx[i] = first + i;
        return select_groups(idx);
    }

    goof goof::select_grid(int label) const
    {
        auto it = std::find(grid_labels.begin(), grid_labels.end(), label);
        if (it == grid_labels.end())
            throw invalid_argument("goof::select_grid: unknown grid label " + std::to_string(label));
        const std::size_t q = std::size_t(it - grid_labels.begin());
        goof out = *this;
        out.grid_labels = {label};
        for (auto k : all_fingerprint_kinds)
        {
            const auto &src = table(k);
            auto &dst = out.table(k);
            dst.features.assign(src.features.begin() + std::ptrdiff_t(q * group_count * src.dimension),
                                src.features.begin() + std::ptrdiff_t((q + 1) * group_count * src.dimension));
            dst.labels.assign(group_count, label);
        }
        return out;
    }

    goof build_goof(std::span<const snapshot_block> blocks, const goof_params &params)
    {
        if (blocks.empty())
            throw invalid_argument("build_goof: no snapshot blocks");
        if (params.group_count < 1)
            throw invalid_argument("build_goof: group_count must be >= 1");

        const std::size_t M = blocks[0].elements();
        const std::size_t L = blocks[0].snapshots();
        if (M == 0 || L == 0)
            throw invalid_argument("build_goof: empty snapshot block");
        if (L % params.group_count != 0)
            throw invalid_argument("build_goof: " + std::to_string(L) + " snapshots are not divisible into " +
                                   std::to_string(params.group_count) + " groups");
        const std::size_t per_group = L / params.group_count;
        const std::size_t K = params.psd_points == 0 ? per_group : params.psd_points;
        if (K > per_group)
            throw invalid_argument("build_goof: psd_points exceeds snapshots per group");

        std::vector<const snapshot_block *> order;
        for (const auto &b : blocks)
        {
            if (b.elements() != M || b.snapshots() != L)
                throw invalid_argument("build_goof: all blocks must share the same M x L shape");
            if (b.grid_label < 1)
                throw invalid_argument("build_goof: grid labels must be positive");
            order.push_back(&b);
        }
        std::sort(order.begin(), order.end(), [](auto *a, auto *b)
                  { return a->grid_label < b->grid_label; });
        for (std::size_t i = 1; i < order.size(); ++i)
            if (order[i]->grid_label == order[i - 1]->grid_label)
                throw invalid_argument("build_goof: duplicate grid label " + std::to_string(order[i]->grid_label));

        goof g;
        g.elements = M;
        g.group_count = params.group_count;
        g.snapshots_per_group = per_group;
        g.psd_points = K;
        g.flom_p = params.flom_p;
        g.noise = blocks[0].noise;
        g.snr_db = blocks[0].snr_db;
        for (auto k : all_fingerprint_kinds)
        {
            g.table(k).kind = k;
            g.table(k).dimension = fingerprint_dimension(k, M, K);
        }

        for (const auto *b : order)
        {
            g.grid_labels.push_back(b->grid_label);
            for (std::size_t grp = 0; grp < params.group_count; ++grp)
            {
                const cmatrix y = column_range(b->data, grp * per_group, per_group);
                const int q = b->grid_label;

                const cmatrix R = est_covariance(y);
                const auto rss = extract_rss(R);
                const auto psd = est_psd(y, K);
                const auto ss = est_signal_subspace(R);
                const cmatrix foc = est_foc(y);
                const cmatrix flom = est_flom(y, params.flom_p);

                g.table(fingerprint_kind::cmf).append(vectorize(R, fingerprint_kind::cmf), q);
                g.table(fingerprint_kind::rssf).append(vectorize(std::span<const double>(rss), fingerprint_kind::rssf), q);
                g.table(fingerprint_kind::psdf).append(vectorize(psd, fingerprint_kind::psdf), q);
                g.table(fingerprint_kind::ssf).append(vectorize(std::span<const double>(ss), fingerprint_kind::ssf), q);
                g.table(fingerprint_kind::focf).append(vectorize(foc, fingerprint_kind::focf), q);
                g.table(fingerprint_kind::flomf).append(vectorize(flom, fingerprint_kind::flomf), q);
            }
        }
        g.validate();
        return g;
    }

} // namespace goofloc

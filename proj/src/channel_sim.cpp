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

#include "goofloc/channel_sim.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "goofloc/error.hpp"

namespace goofloc
{
    namespace
    {
        constexpr double pi = std::numbers::pi;

        bool inside(const scenario &room, point2 p)
        {
            return p.x >= 0.0 && p.y >= 0.0 && p.x <= room.room_width && p.y <= room.room_height;
        }

        double mean_power(const cmatrix &m)
        {
            double acc = 0.0;
            for (const auto &v : m.data())
                acc += std::norm(v);
            return m.empty() ? 0.0 : acc / double(m.size());
        }

        double noise_variance(double signal_power, double snr_db)
        {
            return signal_power / std::pow(10.0, snr_db / 10.0);
        }
    } // namespace

    void array_geometry::validate() const
    {
        if (num_elements < 2)
            throw invalid_argument("array geometry: num_elements must be >= 2");
        if (!(spacing_over_wavelength > 0.0) || !std::isfinite(spacing_over_wavelength))
            throw invalid_argument("array geometry: spacing_over_wavelength must be > 0");
    }

    void scenario::validate() const
    {
        if (!(room_width > 0.0) || !(room_height > 0.0))
            throw invalid_argument("scenario: room dimensions must be positive");
        if (grid_positions.empty())
            throw invalid_argument("scenario: at least one grid is required");
        double n = std::hypot(array_normal.x, array_normal.y);
        if (std::abs(n - 1.0) > 1e-9)
            throw invalid_argument("scenario: array_normal must be a unit vector");
        for (std::size_t i = 0; i < grid_positions.size(); ++i)
            if (!inside(*this, grid_positions[i]))
                throw invalid_argument("scenario: grid " + std::to_string(i + 1) + " lies outside the room");
    }

    scenario scenario::rectangular(double width, double height, std::size_t cols, std::size_t rows)
    {
        if (cols == 0 || rows == 0)
            throw invalid_argument("scenario: grid_cols and grid_rows must be positive");
        scenario s;
        s.room_width = width;
        s.room_height = height;
        double d = std::hypot(width, height);
        s.array_normal = {width / d, height / d};
        s.grid_positions.reserve(cols * rows);
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t c = 0; c < cols; ++c)
                s.grid_positions.push_back({(double(c) + 0.5) * width / double(cols),
                                            (double(r) + 0.5) * height / double(rows)});
        s.validate();
        return s;
    }

    std::string_view to_string(noise_kind kind)
    {
        switch (kind)
        {
        case noise_kind::none:
            return "none";
        case noise_kind::gaussian:
            return "gaussian";
        case noise_kind::color:
            return "color";
        case noise_kind::impulse:
            return "impulse";
        }
        return "unknown";
    }

    noise_kind noise_kind_from_string(std::string_view name)
    {
        if (name == "none")
            return noise_kind::none;
        if (name == "gaussian")
            return noise_kind::gaussian;
        if (name == "color" || name == "colour")
            return noise_kind::color;
        if (name == "impulse")
            return noise_kind::impulse;
        throw invalid_argument("unknown noise kind '" + std::string(name) + "'");
    }

    void noise_spec::validate() const
    {
        if (kind == noise_kind::none)
            throw invalid_argument("noise settings: unsupported noise kind 'none'");
        if (std::isnan(snr_db))
            throw invalid_argument("noise settings: snr_db is NaN");
        if (fir_window_length < 1)
            throw invalid_argument("noise settings: fir_window_length must be >= 1");
        if (kind == noise_kind::impulse)
        {
            if (!(alpha > 0.0 && alpha <= 2.0))
                throw invalid_argument("noise settings: impulse alpha must lie in (0, 2]");
            if (!(beta >= -1.0 && beta <= 1.0))
                throw invalid_argument("noise settings: impulse beta must lie in [-1, 1]");
        }
    }

    std::vector<cdouble> steering_vector(double theta, const array_geometry &geometry)
    {
        geometry.validate();
        if (!std::isfinite(theta))
            throw invalid_argument("steering_vector: theta must be finite");

        std::vector<cdouble> a(geometry.num_elements);
        double phase_step = -2.0 * pi * geometry.spacing_over_wavelength * std::sin(theta);
        for (std::size_t m = 0; m < a.size(); ++m)
        {
            cdouble gain = geometry.element_pattern ? geometry.element_pattern(m, theta) : cdouble(1.0, 0.0);
            a[m] = gain * std::polar(1.0, phase_step * double(m));
        }
        return a;
    }

    channel_center geometry_to_channel(point2 grid_position, const scenario &room)
    {
        if (!inside(room, grid_position))
            throw invalid_argument("geometry_to_channel: grid position outside the room");
        double dx = grid_position.x - room.array_position.x;
        double dy = grid_position.y - room.array_position.y;
        double dist = std::hypot(dx, dy);
        if (dist < 1e-9)
            throw degenerate_geometry("geometry_to_channel: grid coincides with the array");

        const point2 n = room.array_normal;
        double along = n.x * dx + n.y * dy;
        double across = n.x * dy - n.y * dx;
        return {std::atan2(across, along), dist / speed_of_light};
    }

    path_set generate_paths(double central_aoa, double mean_delay, double angular_spread,
                            double delay_spread, std::size_t path_count, rng_engine &rng)
    {
        if (path_count < 1)
            throw invalid_argument("generate_paths: path_count must be >= 1");
        if (!(angular_spread >= 0.0) || !(delay_spread >= 0.0))
            throw invalid_argument("generate_paths: spreads must be non-negative");
        if (!std::isfinite(central_aoa) || !std::isfinite(mean_delay))
            throw invalid_argument("generate_paths: central AoA and delay must be finite");

        // A uniform density of half-width sqrt(3)*sigma has standard deviation sigma
        const double aoa_half = std::sqrt(3.0) * angular_spread;
        const double delay_half = std::sqrt(3.0) * delay_spread;

        std::uniform_real_distribution<double> unit(-1.0, 1.0);
        std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));

        path_set ps;
        ps.central_aoa = central_aoa;
        ps.angular_spread = angular_spread;
        ps.mean_delay = mean_delay;
        ps.delay_spread = delay_spread;
        ps.paths.resize(path_count);

        double total = 0.0;
        for (auto &p : ps.paths)
        {
            p.aoa = aoa_half > 0.0 ? central_aoa + aoa_half * unit(rng) : central_aoa;
            p.delay = delay_half > 0.0 ? std::max(0.0, mean_delay + delay_half * unit(rng)) : std::max(0.0, mean_delay);
            p.gain = {gauss(rng), gauss(rng)};
            total += std::norm(p.gain);
        }

        if (total <= 0.0)
        {
            for (auto &p : ps.paths)
                p.gain = cdouble(1.0 / std::sqrt(double(path_count)), 0.0);
            return ps;
        }

        const double scale = 1.0 / std::sqrt(total);
        for (auto &p : ps.paths)
            p.gain *= scale;
        return ps;
    }

    snapshot_block synthesize_snapshots(const path_set &paths, const array_geometry &geometry,
                                        std::size_t snapshots, rng_engine &rng, double source_frequency)
    {
        geometry.validate();
        if (snapshots < 1)
            throw invalid_argument("synthesize_snapshots: snapshot count must be >= 1");
        if (paths.paths.empty())
            throw invalid_argument("synthesize_snapshots: empty path set");

        const std::size_t M = geometry.num_elements;

        // Narrowband: the whole multipath field collapses onto one spatial signature h
        std::vector<cdouble> h(M, cdouble(0.0, 0.0));
        for (const auto &p : paths.paths)
        {
            auto a = steering_vector(p.aoa, geometry);
            cdouble rot = p.gain * std::polar(1.0, -2.0 * pi * geometry.carrier_frequency_hz * p.delay);
            for (std::size_t m = 0; m < M; ++m)
                h[m] += rot * a[m];
        }

        std::uniform_real_distribution<double> phase(0.0, 2.0 * pi);
        const double phi = phase(rng);

        snapshot_block block;
        block.data = cmatrix(M, snapshots);
        for (std::size_t t = 0; t < snapshots; ++t)
        {
            cdouble s = std::polar(1.0, 2.0 * pi * source_frequency * double(t) + phi);
            for (std::size_t m = 0; m < M; ++m)
                block.data(m, t) = h[m] * s;
        }
        block.signal_power = mean_power(block.data);
        block.snr_db = noiseless_snr;
        block.noise = noise_kind::none;
        return block;
    }

    double sample_stable(double alpha, double beta, double scale, double location, rng_engine &rng)
    {
        std::uniform_real_distribution<double> uni(-pi / 2.0, pi / 2.0);
        std::exponential_distribution<double> expo(1.0);

        double v = uni(rng);
        double w = expo(rng);
        while (w == 0.0)
            w = expo(rng);

        if (alpha == 1.0)
        {
            double x = (2.0 / pi) * ((pi / 2.0 + beta * v) * std::tan(v) -
                                     beta * std::log((pi / 2.0 * w * std::cos(v)) / (pi / 2.0 + beta * v)));
            return scale * x + (2.0 / pi) * beta * scale * std::log(scale) + location;
        }

        double t = beta * std::tan(pi * alpha / 2.0);
        double b = std::atan(t) / alpha;
        double s = std::pow(1.0 + t * t, 1.0 / (2.0 * alpha));
        double x = s * std::sin(alpha * (v + b)) / std::pow(std::cos(v), 1.0 / alpha) *
                   std::pow(std::cos(v - alpha * (v + b)) / w, (1.0 - alpha) / alpha);
        return scale * x + location;
    }

    snapshot_block add_noise(snapshot_block block, const noise_spec &spec, rng_engine &rng)
    {
        spec.validate();
        if (spec.snr_db == noiseless_snr)
            return block;

        const std::size_t M = block.elements();
        const std::size_t L = block.snapshots();
        double ps = std::isfinite(block.signal_power) ? block.signal_power : mean_power(block.data);

        switch (spec.kind)
        {
        case noise_kind::gaussian:
        {
            std::normal_distribution<double> g(0.0, std::sqrt(noise_variance(ps, spec.snr_db) / 2.0));
            for (std::size_t t = 0; t < L; ++t)
                for (std::size_t m = 0; m < M; ++m)
                {
                    double re = g(rng);
                    block.data(m, t) += cdouble(re, g(rng));
                }
            break;
        }
        case noise_kind::color:
        {
            // White noise through an all-ones FIR scaled to unit energy keeps the variance
            const std::size_t F = spec.fir_window_length;
            const double tap = 1.0 / std::sqrt(double(F));
            std::normal_distribution<double> g(0.0, std::sqrt(noise_variance(ps, spec.snr_db) / 2.0));
            std::vector<cdouble> white(L + F - 1);
            for (std::size_t m = 0; m < M; ++m)
            {
                for (auto &w : white)
                {
                    double re = g(rng);
                    w = cdouble(re, g(rng));
                }
                cdouble acc(0.0, 0.0);
                for (std::size_t i = 0; i < F - 1; ++i)
                    acc += white[i];
                for (std::size_t t = 0; t < L; ++t)
                {
                    acc += white[t + F - 1];
                    block.data(m, t) += tap * acc;
                    acc -= white[t];
                }
            }
            break;
        }
        case noise_kind::impulse:
        {
            // Each quadrature gets dispersion xi, i.e. scale xi^(1/alpha)
            const double xi = noise_variance(ps, spec.snr_db);
            const double scale = std::pow(xi, 1.0 / spec.alpha);
            for (std::size_t t = 0; t < L; ++t)
                for (std::size_t m = 0; m < M; ++m)
                {
                    double re = sample_stable(spec.alpha, spec.beta, scale, spec.delta, rng);
                    double im = sample_stable(spec.alpha, spec.beta, scale, spec.delta, rng);
                    block.data(m, t) += cdouble(re, im);
                }
            break;
        }
        case noise_kind::none:
            throw invalid_argument("add_noise: unsupported noise kind");
        }

        for (const auto &v : block.data.data())
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
                throw numerical_failure("add_noise: produced a non-finite sample");

        block.snr_db = spec.snr_db;
        block.noise = spec.kind;
        return block;
    }

} // namespace goofloc

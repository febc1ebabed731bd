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
#include <functional>
#include <limits>
#include <string_view>
#include <vector>

#include "goofloc/matrix.hpp"
#include "goofloc/rng.hpp"

namespace goofloc
{
    inline constexpr double speed_of_light = 299792458.0; // m/s

    // Uniform linear array. An empty element_pattern means isotropic elements (f_m = 1).
    struct array_geometry
    {
        std::size_t num_elements = 7;
        double spacing_over_wavelength = 0.5;
        double carrier_frequency_hz = 950.0e6;
        std::function<cdouble(std::size_t element, double theta)> element_pattern;

        void validate() const;
    };

    struct point2
    {
        double x = 0.0;
        double y = 0.0;
    };

    // Rectangular room divided into grids. Grid label q (1-based) maps to grid_positions[q - 1].
    struct scenario
    {
        double room_width = 8.0;
        double room_height = 8.0;
        std::vector<point2> grid_positions;
        point2 array_position{0.0, 0.0};
        point2 array_normal{0.70710678118654752, 0.70710678118654752};

        std::size_t grid_count() const noexcept { return grid_positions.size(); }
        void validate() const;

        // cols x rows equal cells with labels running row by row; the array sits at
        // the (0,0) corner with its normal towards the room diagonal.
        static scenario rectangular(double width, double height, std::size_t cols, std::size_t rows);
    };

    struct channel_center
    {
        double aoa;   // central angle of arrival relative to the array normal [rad]
        double delay; // line-of-sight delay [s]
    };

    struct path
    {
        cdouble gain;
        double aoa;
        double delay;
    };

    struct path_set
    {
        std::vector<path> paths;
        double central_aoa = 0.0;
        double angular_spread = 0.0;
        double mean_delay = 0.0;
        double delay_spread = 0.0;
    };

    enum class noise_kind
    {
        none,
        gaussian,
        color,
        impulse,
    };

    std::string_view to_string(noise_kind kind);
    noise_kind noise_kind_from_string(std::string_view name);

    inline constexpr double noiseless_snr = std::numeric_limits<double>::infinity();

    struct noise_spec
    {
        noise_kind kind = noise_kind::gaussian;
        double snr_db = noiseless_snr;
        std::size_t fir_window_length = 5;
        double alpha = 1.4; // SaS characteristic exponent
        double beta = 0.0;
        double delta = 0.0;

        void validate() const;
    };

    struct snapshot_block
    {
        cmatrix data; // M x L
        int grid_label = 0;
        double snr_db = noiseless_snr;
        noise_kind noise = noise_kind::none;
        double signal_power = std::numeric_limits<double>::quiet_NaN(); // NaN when unknown (recorded data)

        std::size_t elements() const noexcept { return data.rows(); }
        std::size_t snapshots() const noexcept { return data.cols(); }
    };

    std::vector<cdouble> steering_vector(double theta, const array_geometry &geometry);

    channel_center geometry_to_channel(point2 grid_position, const scenario &room);

    path_set generate_paths(double central_aoa, double mean_delay, double angular_spread,
                            double delay_spread, std::size_t path_count, rng_engine &rng);

    // Narrowband synthesis: every delay becomes a carrier phase rotation and the source is a
    // unit-power complex exponential s(t) = exp(j(2 pi f t + phi)) with phi drawn from rng.
    // source_frequency is in cycles per snapshot.
    snapshot_block synthesize_snapshots(const path_set &paths, const array_geometry &geometry,
                                        std::size_t snapshots, rng_engine &rng,
                                        double source_frequency = 0.125);

    snapshot_block add_noise(snapshot_block block, const noise_spec &spec, rng_engine &rng);

    // Chambers-Mallows-Stuck draw from S(alpha, beta, scale, location).
    double sample_stable(double alpha, double beta, double scale, double location, rng_engine &rng);

} // namespace goofloc

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

#include "goofloc/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <map>
#include <numbers>
#include <numeric>
#include <set>
#include <thread>

#include "goofloc/error.hpp"
#include "goofloc/persistence.hpp"

namespace goofloc
{
    namespace fs = std::filesystem;
    using nlohmann::json;

    namespace
    {
        using clock_type = std::chrono::steady_clock;

        double seconds_since(clock_type::time_point start)
        {
            return std::chrono::duration<double>(clock_type::now() - start).count();
        }

        json snr_json(double snr)
        {
            if (std::isinf(snr) && snr > 0)
                return "inf";
            return snr;
        }

        double snr_value(const json &j)
        {
            if (j.is_string())
            {
                auto s = j.get<std::string>();
                if (s == "inf" || s == "+inf" || s == "none")
                    return noiseless_snr;
                throw invalid_argument("snr value '" + s + "' is not a number or \"inf\"");
            }
            return j.get<double>();
        }

        std::string snr_text(double snr)
        {
            if (std::isinf(snr) && snr > 0)
                return "inf";
            char buf[32];
            std::snprintf(buf, sizeof buf, "%g", snr);
            return buf;
        }

        std::string fixed(double v, int digits)
        {
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.*f", digits, v);
            return buf;
        }

        // Field table shared by JSON I/O and single-field overrides
        struct field
        {
            std::function<json(const experiment_config &)> get;
            std::function<void(experiment_config &, const json &)> set;
        };

        template <typename T>
        field plain(T experiment_config::*member)
        {
            return {[member](const experiment_config &c)
                    { return json(c.*member); },
                    [member](experiment_config &c, const json &j)
                    { c.*member = j.get<T>(); }};
        }

        const std::map<std::string, field> &fields()
        {
            using C = experiment_config;
            static const std::map<std::string, field> table = {
                {"room_width", plain(&C::room_width)},
                {"room_height", plain(&C::room_height)},
                {"grid_cols", plain(&C::grid_cols)},
                {"grid_rows", plain(&C::grid_rows)},
                {"elements", plain(&C::elements)},
                {"spacing_over_wavelength", plain(&C::spacing_over_wavelength)},
                {"carrier_frequency_hz", plain(&C::carrier_frequency_hz)},
                {"path_count", plain(&C::path_count)},
                {"angular_spread_deg", plain(&C::angular_spread_deg)},
                {"delay_spread_ratio", plain(&C::delay_spread_ratio)},
                {"source_frequency", plain(&C::source_frequency)},
                {"noise_kinds",
                 {[](const C &c)
                  {
                      json a = json::array();
                      for (auto k : c.noise_kinds)
                          a.push_back(to_string(k));
                      return a;
                  },
                  [](C &c, const json &j)
                  {
                      c.noise_kinds.clear();
                      for (const auto &e : j.is_array() ? j : json::array({j}))
                          c.noise_kinds.push_back(noise_kind_from_string(e.get<std::string>()));
                  }}},
                {"snr_db",
                 {[](const C &c)
                  {
                      json a = json::array();
                      for (double s : c.snr_db)
                          a.push_back(snr_json(s));
                      return a;
                  },
                  [](C &c, const json &j)
                  {
                      c.snr_db.clear();
                      for (const auto &e : j.is_array() ? j : json::array({j}))
                          c.snr_db.push_back(snr_value(e));
                  }}},
                {"fir_window_length", plain(&C::fir_window_length)},
                {"stable_alpha", plain(&C::stable_alpha)},
                {"stable_beta", plain(&C::stable_beta)},
                {"stable_delta", plain(&C::stable_delta)},
                {"snapshots", plain(&C::snapshots)},
                {"group_count", plain(&C::group_count)},
                {"train_groups", plain(&C::train_groups)},
                {"test_groups", plain(&C::test_groups)},
                {"flom_p", plain(&C::flom_p)},
                {"psd_points", plain(&C::psd_points)},
                {"tree_count", plain(&C::tree_count)},
                {"tree_depth", plain(&C::tree_depth)},
                {"primitive",
                 {[](const C &c)
                  { return json(to_string(c.primitive)); },
                  [](C &c, const json &j)
                  { c.primitive = split_primitive_from_string(j.get<std::string>()); }}},
                {"feature_subspace_size", plain(&C::feature_subspace_size)},
                {"threshold_candidates", plain(&C::threshold_candidates)},
                {"window_lengths",
                 {[](const C &c)
                  { return json(c.window_lengths); },
                  [](C &c, const json &j)
                  { c.window_lengths = j.is_array() ? j.get<std::vector<std::size_t>>()
                                                    : std::vector<std::size_t>{j.get<std::size_t>()}; }}},
                {"sweep_depths",
                 {[](const C &c)
                  { return json(c.sweep_depths); },
                  [](C &c, const json &j)
                  { c.sweep_depths = j.is_array() ? j.get<std::vector<int>>() : std::vector<int>{j.get<int>()}; }}},
                {"sweep_tree_counts",
                 {[](const C &c)
                  { return json(c.sweep_tree_counts); },
                  [](C &c, const json &j)
                  { c.sweep_tree_counts = j.is_array() ? j.get<std::vector<std::size_t>>()
                                                       : std::vector<std::size_t>{j.get<std::size_t>()}; }}},
                {"forest_sweep_noise",
                 {[](const C &c)
                  { return json(to_string(c.forest_sweep_noise)); },
                  [](C &c, const json &j)
                  { c.forest_sweep_noise = noise_kind_from_string(j.get<std::string>()); }}},
                {"repetitions", plain(&C::repetitions)},
                {"seed",
                 {[](const C &c)
                  { return c.seed ? json(*c.seed) : json(nullptr); },
                  [](C &c, const json &j)
                  {
                      if (j.is_null())
                          c.seed.reset();
                      else
                          c.seed = j.get<std::uint64_t>();
                  }}},
                {"centroid_error", plain(&C::centroid_error)},
            };
            return table;
        }

        void require(bool ok, std::string_view name, std::string_view what)
        {
            if (!ok)
                throw invalid_argument("config." + std::string(name) + ": " + std::string(what));
        }

        bool positive_finite(double x) { return std::isfinite(x) && x > 0.0; }

        // Fixed-size worker pool; result i always lands in slot i
        template <typename R, typename F>
        std::vector<R> run_jobs(std::size_t n, std::size_t workers, F &&job)
        {
            std::vector<R> out(n);
            std::vector<std::exception_ptr> errors(n);
            std::atomic<std::size_t> next{0};
            auto work = [&]
            {
                for (std::size_t i; (i = next.fetch_add(1)) < n;)
                {
                    try
                    {
                        out[i] = job(i);
                    }
                    catch (...)
                    {
                        errors[i] = std::current_exception();
                    }
                }
            };
            workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(n, 1));
            if (workers == 1)
                work();
            else
            {
                std::vector<std::jthread> pool;
                for (std::size_t w = 0; w < workers; ++w)
                    pool.emplace_back(work);
            }
            for (auto &e : errors)
                if (e)
                    std::rethrow_exception(e);
            return out;
        }

        double distance(point2 a, point2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

        constexpr std::string_view mode_method = "MODE-FULL";

        std::string swim_method(std::size_t w) { return "SWIM-W" + std::to_string(w); }

        std::vector<std::string> forest_method_names(const experiment_config &c, report_kind vary)
        {
            std::vector<std::string> out;
            if (vary == report_kind::forest_depth)
                for (int d : c.sweep_depths)
                    out.push_back("depth-" + std::to_string(d));
            else
                for (auto t : c.sweep_tree_counts)
                    out.push_back("trees-" + std::to_string(t));
            return out;
        }

        forest_params forest_params_for(const experiment_config &c, std::uint64_t seed)
        {
            forest_params p;
            p.tree_count = c.tree_count;
            p.depth_limit = c.tree_depth;
            p.spec = {c.primitive, c.feature_subspace_size, c.threshold_candidates};
            p.seed = seed;
            return p;
        }

        goof_params goof_params_for(const experiment_config &c)
        {
            return {c.group_count, c.flom_p, c.psd_points};
        }

        std::size_t noise_tag(noise_kind k) { return std::size_t(k); }

        // ---- SNR sweep -----------------------------------------------------------------------

        struct snr_cell_result
        {
            std::vector<double> rho;   // per method
            std::vector<double> error; // per method
            std::vector<double> train; // per method
            std::vector<double> test;  // per method
            std::vector<fusion_record> fusion;
        };

        snr_cell_result evaluate_snr_cell(const experiment_config &c, std::uint64_t rep_seed, noise_kind kind,
                                          std::size_t snr_index)
        {
            const auto blocks = simulate_cell(c, rep_seed, kind, snr_index);
            const goof all = build_goof(blocks, goof_params_for(c));
            const goof train = all.select_groups(0, c.train_groups);
            const goof test = all.select_groups(c.train_groups, c.test_groups);

            std::array<double, fingerprint_kind_count> train_s{};
            const auto bank = train_bank(
                train, forest_params_for(c, derive_seed(rep_seed, {4, noise_tag(kind), snr_index})), &train_s);
            const double bank_train = std::accumulate(train_s.begin(), train_s.end(), 0.0);

            const scenario room = c.room();
            const int Q = int(c.grid_count());
            const std::size_t H = fingerprint_kind_count;
            const std::size_t methods = H + 1 + c.window_lengths.size();

            snr_cell_result r;
            r.rho.assign(methods, 0.0);
            r.error.assign(methods, 0.0);
            r.train.assign(methods, bank_train);
            r.test.assign(methods, 0.0);
            for (std::size_t h = 0; h < H; ++h)
                r.train[h] = train_s[h];

            auto err_of = [&](int predicted, int truth)
            {
                return distance(room.grid_positions[std::size_t(predicted - 1)],
                                room.grid_positions[std::size_t(truth - 1)]);
            };

            for (int q : all.grid_labels)
            {
                const goof grid_test = test.select_grid(q);
                std::array<double, fingerprint_kind_count> test_s{};
                const prediction_matrix B = test_goof(bank, grid_test, &test_s);
                const double bank_test = std::accumulate(test_s.begin(), test_s.end(), 0.0);

                for (std::size_t h = 0; h < H; ++h)
                {
                    auto col = B.column(h);
                    r.rho[h] += prediction_probability(col, q);
                    double e = 0.0;
                    for (int p : col)
                        e += err_of(p, q);
                    r.error[h] += e / double(col.size());
                    r.test[h] += test_s[h];
                }

                auto start = clock_type::now();
                const int full = full_matrix_estimate(B, Q);
                r.test[H] += bank_test + seconds_since(start);
                r.rho[H] += full == q ? 1.0 : 0.0;
                r.error[H] += err_of(full, q);

                for (std::size_t w = 0; w < c.window_lengths.size(); ++w)
                {
                    start = clock_type::now();
                    fusion_result f = swim(B, c.window_lengths[w], Q);
                    r.test[H + 1 + w] += bank_test + seconds_since(start);
                    r.rho[H + 1 + w] += f.prediction_probability;
                    double e = 0.0;
                    for (int p : f.predictions)
                        e += err_of(p, q);
                    r.error[H + 1 + w] += e / double(f.predictions.size());
                    r.fusion.push_back(make_fusion_record(f, q, H));
                }
            }
            for (std::size_t m = 0; m < methods; ++m)
            {
                r.rho[m] /= double(Q);
                r.error[m] /= double(Q);
            }
            return r;
        }

        // ---- forest sweep --------------------------------------------------------------------

        struct forest_cell_result
        {
            std::vector<double> rho, train, test;
        };

        forest_cell_result evaluate_forest_cell(const experiment_config &c, std::uint64_t rep_seed,
                                                std::size_t snr_index, report_kind vary)
        {
            const auto blocks = simulate_cell(c, rep_seed, c.forest_sweep_noise, snr_index);
            const goof all = build_goof(blocks, goof_params_for(c));

            std::vector<std::size_t> order(c.group_count);
            std::iota(order.begin(), order.end(), std::size_t(0));
            rng_engine split_rng(derive_seed(rep_seed, {5, snr_index}));
            std::shuffle(order.begin(), order.end(), split_rng);
            const std::size_t half = c.group_count / 2;
            const goof train = all.select_groups(std::span(order).first(half));
            const goof test = all.select_groups(std::span(order).subspan(half));

            const auto &tr = train.table(fingerprint_kind::rssf);
            const auto &te = test.table(fingerprint_kind::rssf);
            const int Q = int(c.grid_count());
            training_view view{tr.dimension, tr.features, tr.labels, Q};
            const weak_learner_spec spec{c.primitive, c.feature_subspace_size, c.threshold_candidates};

            const std::size_t values =
                vary == report_kind::forest_depth ? c.sweep_depths.size() : c.sweep_tree_counts.size();
            forest_cell_result r;
            for (std::size_t v = 0; v < values; ++v)
            {
                const int depth = vary == report_kind::forest_depth ? c.sweep_depths[v] : c.tree_depth;
                const std::size_t trees = vary == report_kind::forest_number ? c.sweep_tree_counts[v] : c.tree_count;
                const std::uint64_t seed = derive_seed(rep_seed, {6, snr_index, std::size_t(vary), v});

                auto start = clock_type::now();
                const forest f = train_forest(view, trees, depth, spec, seed, fingerprint_kind::rssf);
                r.train.push_back(seconds_since(start));

                volatile int sink = predict_forest(f, te.row(0)); // untimed warm-up
                (void)sink;
                std::size_t hits = 0;
                start = clock_type::now();
                for (std::size_t i = 0; i < te.rows(); ++i)
                    hits += predict_forest(f, te.row(i)) == te.labels[i];
                r.test.push_back(seconds_since(start));
                r.rho.push_back(double(hits) / double(te.rows()));
            }
            return r;
        }

        json fusion_row_json(const fusion_row &f)
        {
            return {{"noise", to_string(f.noise)},
                    {"snr_db", snr_json(f.snr_db)},
                    {"repetition", f.repetition},
                    {"grid", f.record.grid},
                    {"window_length", f.record.window_length},
                    {"predictions", f.record.prediction_count},
                    {"rho", f.record.prediction_probability},
                    {"selected_histogram", f.record.selection_histogram}};
        }

        std::string csv_header_comment(const report &r)
        {
            return "# config_hash=" + hash_hex(r.config_hash) + " seed=" + std::to_string(r.seed) + " kind=" +
                   std::string(to_string(r.kind)) + "\n";
        }
    } // namespace

    // ---------------------------------------------------------------------------------------------
    // Configuration

    void experiment_config::validate() const
    {
        require(positive_finite(room_width), "room_width", "must be a positive number of meters");
        require(positive_finite(room_height), "room_height", "must be a positive number of meters");
        require(grid_cols >= 1, "grid_cols", "must be >= 1");
        require(grid_rows >= 1, "grid_rows", "must be >= 1");
        require(elements >= 2, "elements", "an array needs at least 2 elements");
        require(positive_finite(spacing_over_wavelength), "spacing_over_wavelength", "must be > 0");
        require(positive_finite(carrier_frequency_hz), "carrier_frequency_hz", "must be > 0");
        require(path_count >= 1, "path_count", "must be >= 1");
        require(std::isfinite(angular_spread_deg) && angular_spread_deg >= 0, "angular_spread_deg", "must be >= 0");
        require(std::isfinite(delay_spread_ratio) && delay_spread_ratio >= 0, "delay_spread_ratio", "must be >= 0");
        require(std::isfinite(source_frequency), "source_frequency", "must be finite");

        require(!noise_kinds.empty(), "noise_kinds", "must list at least one noise kind");
        for (std::size_t i = 0; i < noise_kinds.size(); ++i)
        {
            require(noise_kinds[i] != noise_kind::none, "noise_kinds", "'none' is not a sweep noise kind");
            for (std::size_t j = 0; j < i; ++j)
                require(noise_kinds[i] != noise_kinds[j], "noise_kinds", "duplicate entry");
        }
        require(!snr_db.empty(), "snr_db", "the SNR grid must not be empty");
        for (std::size_t i = 0; i < snr_db.size(); ++i)
        {
            require(!std::isnan(snr_db[i]) && snr_db[i] != -noiseless_snr, "snr_db", "entries must be numbers or \"inf\"");
            for (std::size_t j = 0; j < i; ++j)
                require(snr_db[i] != snr_db[j], "snr_db", "duplicate entry");
        }
        require(fir_window_length >= 1, "fir_window_length", "must be >= 1");
        require(stable_alpha > 0.0 && stable_alpha <= 2.0, "stable_alpha", "must lie in (0, 2]");
        require(stable_beta >= -1.0 && stable_beta <= 1.0, "stable_beta", "must lie in [-1, 1]");
        require(std::isfinite(stable_delta), "stable_delta", "must be finite");

        require(snapshots >= 1, "snapshots", "must be >= 1");
        require(group_count >= 2, "group_count", "must be >= 2");
        require(snapshots % group_count == 0, "group_count", "must divide snapshots");
        require(train_groups >= 1, "train_groups", "must be >= 1");
        require(test_groups >= 1, "test_groups", "must be >= 1");
        require(train_groups + test_groups <= group_count, "train_groups",
                "train_groups + test_groups exceeds group_count");
        require(flom_p > 1.0 && flom_p <= 2.0, "flom_p", "must lie in (1, 2]");
        require(psd_points <= snapshots / group_count, "psd_points", "exceeds snapshots per group");

        require(tree_count >= 1, "tree_count", "must be >= 1");
        require(tree_depth >= 1 && tree_depth <= 30, "tree_depth", "must lie in 1..30");
        require(feature_subspace_size <= elements, "feature_subspace_size",
                "exceeds the smallest fingerprint dimension (elements)");
        require(threshold_candidates >= 1, "threshold_candidates", "must be >= 1");

        require(!window_lengths.empty(), "window_lengths", "must list at least one window length");
        for (std::size_t i = 0; i < window_lengths.size(); ++i)
        {
            require(window_lengths[i] >= 1 && window_lengths[i] <= test_groups, "window_lengths",
                    "each window length must lie in 1..test_groups");
            for (std::size_t j = 0; j < i; ++j)
                require(window_lengths[i] != window_lengths[j], "window_lengths", "duplicate entry");
        }
        require(!sweep_depths.empty(), "sweep_depths", "must not be empty");
        for (int d : sweep_depths)
            require(d >= 1 && d <= 30, "sweep_depths", "entries must lie in 1..30");
        require(!sweep_tree_counts.empty(), "sweep_tree_counts", "must not be empty");
        for (auto t : sweep_tree_counts)
            require(t >= 1, "sweep_tree_counts", "entries must be >= 1");
        require(forest_sweep_noise != noise_kind::none, "forest_sweep_noise", "must be a noise kind");

        require(repetitions >= 1, "repetitions", "must be >= 1");
        require(seed.has_value(), "seed", "a master seed is required");
    }

    std::uint64_t experiment_config::hash() const
    {
        return fnv1a64(config_to_json(*this).dump());
    }

    scenario experiment_config::room() const
    {
        return scenario::rectangular(room_width, room_height, grid_cols, grid_rows);
    }

    array_geometry experiment_config::geometry() const
    {
        array_geometry g;
        g.num_elements = elements;
        g.spacing_over_wavelength = spacing_over_wavelength;
        g.carrier_frequency_hz = carrier_frequency_hz;
        return g;
    }

    std::vector<std::string> experiment_config::method_names() const
    {
        std::vector<std::string> out;
        for (auto k : all_fingerprint_kinds)
            out.emplace_back(to_string(k));
        out.emplace_back(mode_method);
        for (auto w : window_lengths)
            out.push_back(swim_method(w));
        return out;
    }

    json config_to_json(const experiment_config &c)
    {
        json j = json::object();
        for (const auto &[name, f] : fields())
            j[name] = f.get(c);
        return j;
    }

    experiment_config config_from_json(const json &j)
    {
        if (!j.is_object())
            throw invalid_argument("config: expected a JSON object");
        experiment_config c;
        const auto &table = fields();
        for (const auto &[name, value] : j.items())
        {
            auto it = table.find(name);
            if (it == table.end())
                throw invalid_argument("config." + name + ": unknown field");
            try
            {
                it->second.set(c, value);
            }
            catch (const json::exception &e)
            {
                throw invalid_argument("config." + name + ": " + e.what());
            }
            catch (const invalid_argument &e)
            {
                throw invalid_argument("config." + name + ": " + e.what());
            }
        }
        return c;
    }

    experiment_config load_config(const fs::path &file)
    {
        const std::string text = read_file(file);
        json j;
        try
        {
            j = json::parse(text);
        }
        catch (const json::parse_error &e)
        {
            throw format_error("config '" + file.string() + "': " + e.what(), e.byte);
        }
        return config_from_json(j);
    }

    void save_config(const fs::path &file, const experiment_config &c)
    {
        write_file_atomic(file, config_to_json(c).dump(2) + "\n");
    }

    const std::vector<std::string> &config_field_names()
    {
        static const std::vector<std::string> names = []
        {
            std::vector<std::string> n;
            for (const auto &[name, f] : fields())
                n.push_back(name);
            return n;
        }();
        return names;
    }

    void set_config_field(experiment_config &c, std::string_view name, std::string_view value)
    {
        json v = json::parse(value.begin(), value.end(), nullptr, false);
        if (v.is_discarded())
        {
            if (value.find(',') != std::string_view::npos)
            {
                v = json::array();
                std::size_t start = 0;
                while (start <= value.size())
                {
                    std::size_t end = std::min(value.find(',', start), value.size());
                    auto item = value.substr(start, end - start);
                    json e = json::parse(item.begin(), item.end(), nullptr, false);
                    v.push_back(e.is_discarded() ? json(std::string(item)) : e);
                    start = end + 1;
                }
            }
            else
                v = std::string(value);
        }
        json patch = json::object();
        patch[std::string(name)] = v;
        json merged = config_to_json(c);
        merged.merge_patch(patch);
        if (v.is_null())
            merged[std::string(name)] = nullptr; // merge_patch would erase the key
        c = config_from_json(merged);
    }

    std::uint64_t fnv1a64(std::string_view bytes) noexcept
    {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (unsigned char b : bytes)
        {
            h ^= b;
            h *= 0x100000001b3ULL;
        }
        return h;
    }

    std::string hash_hex(std::uint64_t h)
    {
        char buf[17];
        std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
        return buf;
    }

    // ---------------------------------------------------------------------------------------------
    // Simulation

    std::uint64_t repetition_seed(std::uint64_t master, std::size_t rep)
    {
        return derive_seed(master, {rep});
    }

    noise_spec noise_for(const experiment_config &c, noise_kind kind, double snr_db)
    {
        noise_spec n;
        n.kind = kind;
        n.snr_db = snr_db;
        n.fir_window_length = c.fir_window_length;
        n.alpha = c.stable_alpha;
        n.beta = c.stable_beta;
        n.delta = c.stable_delta;
        return n;
    }

    std::vector<snapshot_block> simulate_clean(const experiment_config &c, std::uint64_t rep_seed)
    {
        const scenario room = c.room();
        const array_geometry geom = c.geometry();
        const double spread = c.angular_spread_deg * std::numbers::pi / 180.0;
        std::vector<snapshot_block> blocks;
        blocks.reserve(room.grid_count());
        for (std::size_t q = 0; q < room.grid_count(); ++q)
        {
            const channel_center ch = geometry_to_channel(room.grid_positions[q], room);
            rng_engine path_rng(derive_seed(rep_seed, {1, q}));
            const path_set paths =
                generate_paths(ch.aoa, ch.delay, spread, c.delay_spread_ratio * ch.delay, c.path_count, path_rng);
            rng_engine source_rng(derive_seed(rep_seed, {2, q}));
            snapshot_block b = synthesize_snapshots(paths, geom, c.snapshots, source_rng, c.source_frequency);
            b.grid_label = int(q + 1);
            blocks.push_back(std::move(b));
        }
        return blocks;
    }

    std::vector<snapshot_block> simulate_cell(const experiment_config &c, std::uint64_t rep_seed, noise_kind kind,
                                              std::size_t snr_index)
    {
        if (snr_index >= c.snr_db.size())
            throw invalid_argument("simulate_cell: SNR index out of range");
        auto blocks = simulate_clean(c, rep_seed);
        const noise_spec spec = noise_for(c, kind, c.snr_db[snr_index]);
        for (std::size_t q = 0; q < blocks.size(); ++q)
        {
            rng_engine rng(derive_seed(rep_seed, {3, noise_tag(kind), snr_index, q}));
            blocks[q] = add_noise(std::move(blocks[q]), spec, rng);
            blocks[q].noise = kind;
            blocks[q].snr_db = spec.snr_db;
        }
        return blocks;
    }

    // ---------------------------------------------------------------------------------------------
    // Reports

    std::string_view to_string(report_kind k)
    {
        switch (k)
        {
        case report_kind::snr:
            return "snr";
        case report_kind::forest_depth:
            return "forest-depth";
        case report_kind::forest_number:
            return "forest-number";
        }
        return "?";
    }

    report_kind report_kind_from_string(std::string_view name)
    {
        if (name == "snr")
            return report_kind::snr;
        if (name == "forest-depth" || name == "depth")
            return report_kind::forest_depth;
        if (name == "forest-number" || name == "number" || name == "trees")
            return report_kind::forest_number;
        throw invalid_argument("unknown report kind '" + std::string(name) + "'");
    }

    double report_cell::mean_rho() const
    {
        if (rho.empty())
            return 0.0;
        return std::accumulate(rho.begin(), rho.end(), 0.0) / double(rho.size());
    }

    double report_cell::std_rho() const
    {
        if (rho.size() < 2)
            return 0.0;
        const double m = mean_rho();
        double s = 0.0;
        for (double r : rho)
            s += (r - m) * (r - m);
        return std::sqrt(s / double(rho.size() - 1));
    }

    const report_cell *report::find(noise_kind noise, double snr, std::string_view method) const
    {
        for (const auto &c : cells)
            if (c.noise == noise && c.snr_db == snr && c.method == method)
                return &c;
        return nullptr;
    }

    void report::check_complete() const
    {
        if (cells.empty())
            throw invalid_argument("report: no cells (reports must be complete)");
        const experiment_config c = config_from_json(config);
        std::vector<noise_kind> noises =
            kind == report_kind::snr ? c.noise_kinds : std::vector<noise_kind>{c.forest_sweep_noise};
        const auto methods = kind == report_kind::snr ? c.method_names() : forest_method_names(c, kind);
        for (auto n : noises)
            for (double s : c.snr_db)
                for (const auto &m : methods)
                {
                    const report_cell *cell = find(n, s, m);
                    if (!cell || cell->rho.empty())
                        throw invalid_argument("report: missing cell " + std::string(to_string(n)) + "/" +
                                               snr_text(s) + "/" + m);
                    for (double r : cell->rho)
                        if (!(r >= 0.0 && r <= 1.0))
                            throw invalid_argument("report: prediction probability outside [0, 1]");
                }
    }

    report run_snr_sweep(const experiment_config &c, const run_options &opt)
    {
        c.validate();
        const std::size_t N = c.noise_kinds.size(), S = c.snr_db.size(), R = c.repetitions;
        const auto methods = c.method_names();

        auto results = run_jobs<snr_cell_result>(N * S * R, opt.jobs, [&](std::size_t i)
                                                 {
            const std::size_t rep = i % R, s = (i / R) % S, n = i / (R * S);
            return evaluate_snr_cell(c, repetition_seed(*c.seed, rep), c.noise_kinds[n], s); });

        report out;
        out.kind = report_kind::snr;
        out.config_hash = c.hash();
        out.seed = *c.seed;
        out.config = config_to_json(c);
        out.timing.resize(methods.size());
        for (std::size_t m = 0; m < methods.size(); ++m)
        {
            out.timing[m].method = methods[m];
            const std::size_t H = fingerprint_kind_count;
            out.timing[m].predictions_per_grid =
                m < H ? double(c.test_groups) : m == H ? 1.0
                                                       : double(c.test_groups - c.window_lengths[m - H - 1] + 1);
        }

        for (std::size_t n = 0; n < N; ++n)
            for (std::size_t s = 0; s < S; ++s)
            {
                for (std::size_t m = 0; m < methods.size(); ++m)
                {
                    report_cell cell;
                    cell.noise = c.noise_kinds[n];
                    cell.snr_db = c.snr_db[s];
                    cell.method = methods[m];
                    for (std::size_t rep = 0; rep < R; ++rep)
                    {
                        const auto &res = results[(n * S + s) * R + rep];
                        cell.rho.push_back(res.rho[m]);
                        if (c.centroid_error)
                            cell.centroid_error.push_back(res.error[m]);
                        out.timing[m].train_seconds += res.train[m];
                        out.timing[m].test_seconds += res.test[m];
                        ++out.timing[m].cells;
                    }
                    out.cells.push_back(std::move(cell));
                }
                for (std::size_t rep = 0; rep < R; ++rep)
                    for (const auto &f : results[(n * S + s) * R + rep].fusion)
                        out.fusion.push_back({c.noise_kinds[n], c.snr_db[s], rep, f});
            }
        for (auto &t : out.timing)
        {
            t.train_seconds /= double(t.cells);
            t.test_seconds /= double(t.cells);
        }
        return out;
    }

    report run_forest_sweep(const experiment_config &c, report_kind vary, const run_options &opt)
    {
        if (vary == report_kind::snr)
            throw invalid_argument("run_forest_sweep: vary must be tree depth or tree number");
        c.validate();
        const std::size_t S = c.snr_db.size(), R = c.repetitions;
        const auto methods = forest_method_names(c, vary);

        auto results = run_jobs<forest_cell_result>(S * R, opt.jobs, [&](std::size_t i)
                                                    { return evaluate_forest_cell(c, repetition_seed(*c.seed, i % R),
                                                                                  i / R, vary); });

        report out;
        out.kind = vary;
        out.config_hash = c.hash();
        out.seed = *c.seed;
        out.config = config_to_json(c);
        out.timing.resize(methods.size());
        const double per_grid = double(c.group_count - c.group_count / 2);
        for (std::size_t m = 0; m < methods.size(); ++m)
        {
            out.timing[m].method = methods[m];
            out.timing[m].predictions_per_grid = per_grid;
        }
        for (std::size_t s = 0; s < S; ++s)
            for (std::size_t m = 0; m < methods.size(); ++m)
            {
                report_cell cell;
                cell.noise = c.forest_sweep_noise;
                cell.snr_db = c.snr_db[s];
                cell.method = methods[m];
                for (std::size_t rep = 0; rep < R; ++rep)
                {
                    const auto &res = results[s * R + rep];
                    cell.rho.push_back(res.rho[m]);
                    out.timing[m].train_seconds += res.train[m];
                    out.timing[m].test_seconds += res.test[m];
                    ++out.timing[m].cells;
                }
                out.cells.push_back(std::move(cell));
            }
        for (auto &t : out.timing)
        {
            t.train_seconds /= double(t.cells);
            t.test_seconds /= double(t.cells);
        }
        return out;
    }

    json report_to_json(const report &r)
    {
        json cells = json::array();
        for (const auto &c : r.cells)
        {
            json cell = {{"noise", to_string(c.noise)}, {"snr_db", snr_json(c.snr_db)}, {"method", c.method}, {"rho", c.rho}};
            if (!c.centroid_error.empty())
                cell["centroid_error_m"] = c.centroid_error;
            cells.push_back(std::move(cell));
        }
        json timing = json::array();
        for (const auto &t : r.timing)
            timing.push_back({{"method", t.method},
                              {"train_seconds", t.train_seconds},
                              {"test_seconds", t.test_seconds},
                              {"predictions_per_grid", t.predictions_per_grid},
                              {"cells", t.cells}});
        json fusion = json::array();
        for (const auto &f : r.fusion)
            fusion.push_back(fusion_row_json(f));
        return {{"format", "goofloc-report"},
                {"version", 1},
                {"kind", to_string(r.kind)},
                {"config_hash", hash_hex(r.config_hash)},
                {"seed", r.seed},
                {"config", r.config},
                {"cells", cells},
                {"timing", timing},
                {"fusion", fusion}};
    }

    report report_from_json(const json &j)
    {
        try
        {
            if (j.value("format", "") != "goofloc-report")
                throw format_error("report: missing goofloc-report format tag", 0);
            if (j.at("version").get<int>() != 1)
                throw format_error("report: unsupported version", 0);
            report r;
            r.kind = report_kind_from_string(j.at("kind").get<std::string>());
            r.config_hash = std::stoull(j.at("config_hash").get<std::string>(), nullptr, 16);
            r.seed = j.at("seed").get<std::uint64_t>();
            r.config = j.at("config");
            if (config_from_json(r.config).hash() != r.config_hash)
                throw format_error("report: config_hash does not match the embedded config", 0);
            for (const auto &c : j.at("cells"))
            {
                report_cell cell;
                cell.noise = noise_kind_from_string(c.at("noise").get<std::string>());
                cell.snr_db = snr_value(c.at("snr_db"));
                cell.method = c.at("method").get<std::string>();
                cell.rho = c.at("rho").get<std::vector<double>>();
                if (c.contains("centroid_error_m"))
                    cell.centroid_error = c.at("centroid_error_m").get<std::vector<double>>();
                r.cells.push_back(std::move(cell));
            }
            for (const auto &t : j.at("timing"))
                r.timing.push_back({t.at("method").get<std::string>(), t.at("train_seconds").get<double>(),
                                    t.at("test_seconds").get<double>(), t.at("predictions_per_grid").get<double>(),
                                    t.at("cells").get<std::size_t>()});
            for (const auto &f : j.value("fusion", json::array()))
            {
                fusion_row row{noise_kind_from_string(f.at("noise").get<std::string>()), snr_value(f.at("snr_db")),
                               f.at("repetition").get<std::size_t>(), {}};
                row.record.grid = f.at("grid").get<int>();
                row.record.window_length = f.at("window_length").get<std::size_t>();
                row.record.prediction_count = f.at("predictions").get<std::size_t>();
                row.record.prediction_probability = f.at("rho").get<double>();
                row.record.selection_histogram = f.at("selected_histogram").get<std::vector<std::size_t>>();
                r.fusion.push_back(std::move(row));
            }
            return r;
        }
        catch (const json::exception &e)
        {
            throw format_error(std::string("report: ") + e.what(), 0);
        }
        catch (const std::logic_error &e) // stoull
        {
            throw format_error(std::string("report: bad config_hash: ") + e.what(), 0);
        }
    }

    void save_report(const fs::path &file, const report &r)
    {
        write_file_atomic(file, report_to_json(r).dump(1) + "\n");
    }

    report load_report(const fs::path &file)
    {
        const std::string text = read_file(file);
        json j;
        try
        {
            j = json::parse(text);
        }
        catch (const json::parse_error &e)
        {
            throw format_error("report '" + file.string() + "': " + e.what(), e.byte);
        }
        return report_from_json(j);
    }

    report merge_reports(const std::vector<report> &parts)
    {
        if (parts.empty())
            throw invalid_argument("merge_reports: nothing to merge");
        report out = parts[0];
        out.cells.clear();
        out.timing.clear();
        out.fusion.clear();
        std::map<std::string, std::size_t> timing_index;
        for (const auto &p : parts)
        {
            if (p.config_hash != out.config_hash)
                throw invalid_argument("merge_reports: reports come from different configs (" +
                                       hash_hex(out.config_hash) + " vs " + hash_hex(p.config_hash) + ")");
            if (p.kind != out.kind)
                throw invalid_argument("merge_reports: reports of different kinds");
            if (p.cells.empty())
                throw invalid_argument("merge_reports: empty report");
            for (const auto &c : p.cells)
            {
                if (out.find(c.noise, c.snr_db, c.method))
                    throw invalid_argument("merge_reports: duplicate cell " + std::string(to_string(c.noise)) + "/" +
                                           snr_text(c.snr_db) + "/" + c.method);
                out.cells.push_back(c);
            }
            for (const auto &t : p.timing)
            {
                auto [it, fresh] = timing_index.try_emplace(t.method, out.timing.size());
                if (fresh)
                {
                    out.timing.push_back(t);
                    continue;
                }
                auto &dst = out.timing[it->second];
                const double total = double(dst.cells + t.cells);
                if (total > 0)
                {
                    dst.train_seconds = (dst.train_seconds * double(dst.cells) + t.train_seconds * double(t.cells)) / total;
                    dst.test_seconds = (dst.test_seconds * double(dst.cells) + t.test_seconds * double(t.cells)) / total;
                }
                dst.cells += t.cells;
            }
            out.fusion.insert(out.fusion.end(), p.fusion.begin(), p.fusion.end());
        }
        return out;
    }

    std::string curves_csv(const report &r, noise_kind noise)
    {
        bool with_error = false;
        for (const auto &c : r.cells)
            with_error = with_error || !c.centroid_error.empty();

        std::string out = csv_header_comment(r);
        out += "snr_db,method,mean_rho,std_rho,n";
        if (with_error)
            out += ",aux_centroid_error_m";
        out += "\n";
        for (const auto &c : r.cells)
        {
            if (c.noise != noise)
                continue;
            out += snr_text(c.snr_db) + "," + c.method + "," + fixed(c.mean_rho(), 6) + "," + fixed(c.std_rho(), 6) +
                   "," + std::to_string(c.rho.size());
            if (with_error)
            {
                double e = c.centroid_error.empty()
                               ? 0.0
                               : std::accumulate(c.centroid_error.begin(), c.centroid_error.end(), 0.0) /
                                     double(c.centroid_error.size());
                out += "," + fixed(e, 4);
            }
            out += "\n";
        }
        return out;
    }

    std::string timing_csv(const report &r)
    {
        std::string out = csv_header_comment(r);
        out += "method,train_seconds,test_seconds,predictions_per_grid,test_seconds_per_prediction\n";
        const double grids = double(config_from_json(r.config).grid_count());
        for (const auto &t : r.timing)
        {
            const double per = t.predictions_per_grid > 0 ? t.test_seconds / (t.predictions_per_grid * grids) : 0.0;
            char buf[256];
            std::snprintf(buf, sizeof buf, "%s,%.9f,%.9f,%g,%.3e\n", t.method.c_str(), t.train_seconds,
                          t.test_seconds, t.predictions_per_grid, per);
            out += buf;
        }
        return out;
    }

    std::vector<fs::path> emit_report(const report &r, const fs::path &dir, report_format format)
    {
        r.check_complete();
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (ec || !fs::is_directory(dir))
            throw io_error("cannot create output directory '" + dir.string() + "'");

        std::vector<fs::path> written;
        if (format == report_format::json)
        {
            written.push_back(dir / "report.json");
            save_report(written.back(), r);
            return written;
        }

        std::set<noise_kind> seen;
        std::vector<noise_kind> noises;
        for (const auto &c : r.cells)
            if (seen.insert(c.noise).second)
                noises.push_back(c.noise);
        const std::string prefix = r.kind == report_kind::snr            ? "curves_"
                                   : r.kind == report_kind::forest_depth ? "forest_depth_"
                                                                         : "forest_number_";
        for (auto n : noises)
        {
            written.push_back(dir / (prefix + std::string(to_string(n)) + ".csv"));
            write_file_atomic(written.back(), curves_csv(r, n));
        }
        written.push_back(dir / "timing.csv");
        write_file_atomic(written.back(), timing_csv(r));
        written.push_back(dir / "config.json");
        json echo = {{"config_hash", hash_hex(r.config_hash)}, {"seed", r.seed}, {"config", r.config}};
        write_file_atomic(written.back(), echo.dump(2) + "\n");
        return written;
    }

} // namespace goofloc

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

#include "goofloc/goofloc.h"

#include <cmath>
#include <cstring>
#include <new>
#include <string>

#include "goofloc/error.hpp"
#include "goofloc/experiment.hpp"
#include "goofloc/persistence.hpp"

struct goofloc_config
{
    goofloc::experiment_config value;
};

struct goofloc_dataset
{
    std::vector<goofloc::snapshot_block> blocks;
};

struct goofloc_goof
{
    goofloc::goof value;
};

struct goofloc_bank
{
    goofloc::classifier_bank value;
};

struct goofloc_predictions
{
    std::vector<goofloc::prediction_matrix> matrices;
};

struct goofloc_report
{
    goofloc::report value;
};

namespace
{
    thread_local std::string last_error;
    thread_local std::size_t last_offset = 0;

    goofloc_status fail(goofloc_status s, const char *what, std::size_t offset = 0)
    {
        last_error = what;
        last_offset = offset;
        return s;
    }

    goofloc_status map_code(goofloc::error_code c)
    {
        switch (c)
        {
        case goofloc::error_code::invalid_argument:
            return GOOFLOC_ERR_INVALID_ARGUMENT;
        case goofloc::error_code::format_error:
            return GOOFLOC_ERR_FORMAT;
        case goofloc::error_code::numerical_failure:
            return GOOFLOC_ERR_NUMERICAL;
        case goofloc::error_code::io_error:
            return GOOFLOC_ERR_IO;
        case goofloc::error_code::degenerate_geometry:
            return GOOFLOC_ERR_DEGENERATE_GEOMETRY;
        case goofloc::error_code::degenerate_input:
            return GOOFLOC_ERR_DEGENERATE_INPUT;
        }
        return GOOFLOC_ERR_INTERNAL;
    }

    // Runs body, converting every exception into a status plus thread-local message
    template <typename F>
    goofloc_status guard(F &&body) noexcept
    {
        try
        {
            last_error.clear();
            last_offset = 0;
            body();
            return GOOFLOC_OK;
        }
        catch (const goofloc::format_error &e)
        {
            return fail(GOOFLOC_ERR_FORMAT, e.what(), e.offset());
        }
        catch (const goofloc::error &e)
        {
            return fail(map_code(e.code()), e.what());
        }
        catch (const std::bad_alloc &)
        {
            return fail(GOOFLOC_ERR_INTERNAL, "out of memory");
        }
        catch (const std::exception &e)
        {
            return fail(GOOFLOC_ERR_INTERNAL, e.what());
        }
        catch (...)
        {
            return fail(GOOFLOC_ERR_INTERNAL, "unknown failure");
        }
    }

    template <typename T>
    void need(const T *p, const char *name)
    {
        if (!p)
            throw goofloc::invalid_argument(std::string(name) + " must not be NULL");
    }

    template <typename H, typename V>
    void hand_out(H **out, V &&value)
    {
        need(out, "out");
        *out = new H{std::forward<V>(value)};
    }
} // namespace

extern "C"
{
    const char *goofloc_last_error(void) { return last_error.c_str(); }
    size_t goofloc_last_error_offset(void) { return last_offset; }
    const char *goofloc_version(void) { return "1.0.0"; }

    const char *goofloc_status_name(goofloc_status s)
    {
        switch (s)
        {
        case GOOFLOC_OK:
            return "ok";
        case GOOFLOC_ERR_INVALID_ARGUMENT:
            return "invalid argument";
        case GOOFLOC_ERR_FORMAT:
            return "format error";
        case GOOFLOC_ERR_NUMERICAL:
            return "numerical failure";
        case GOOFLOC_ERR_IO:
            return "i/o error";
        case GOOFLOC_ERR_DEGENERATE_GEOMETRY:
            return "degenerate geometry";
        case GOOFLOC_ERR_DEGENERATE_INPUT:
            return "degenerate input";
        case GOOFLOC_ERR_INTERNAL:
            return "internal error";
        }
        return "unknown status";
    }

    // ---- configuration

    goofloc_status goofloc_config_create(goofloc_config **out)
    {
        return guard([&]
                     { hand_out(out, goofloc::experiment_config{}); });
    }

    goofloc_status goofloc_config_load(const char *path, goofloc_config **out)
    {
        return guard([&]
                     { need(path, "path"); hand_out(out, goofloc::load_config(path)); });
    }

    goofloc_status goofloc_config_set(goofloc_config *cfg, const char *field, const char *value)
    {
        return guard([&]
                     {
            need(cfg, "cfg"); need(field, "field"); need(value, "value");
            goofloc::set_config_field(cfg->value, field, value); });
    }

    goofloc_status goofloc_config_validate(const goofloc_config *cfg)
    {
        return guard([&]
                     { need(cfg, "cfg"); cfg->value.validate(); });
    }

    goofloc_status goofloc_config_save(const goofloc_config *cfg, const char *path)
    {
        return guard([&]
                     { need(cfg, "cfg"); need(path, "path"); goofloc::save_config(path, cfg->value); });
    }

    goofloc_status goofloc_config_hash(const goofloc_config *cfg, uint64_t *hash)
    {
        return guard([&]
                     { need(cfg, "cfg"); need(hash, "hash"); *hash = cfg->value.hash(); });
    }

    size_t goofloc_config_field_count(void) { return goofloc::config_field_names().size(); }

    const char *goofloc_config_field_name(size_t index)
    {
        const auto &n = goofloc::config_field_names();
        return index < n.size() ? n[index].c_str() : nullptr;
    }

    goofloc_status goofloc_config_get(const goofloc_config *cfg, const char *field, char *buf, size_t capacity,
                                      size_t *needed)
    {
        return guard([&]
                     {
            need(cfg, "cfg");
            auto j = goofloc::config_to_json(cfg->value);
            std::string text;
            if (field)
            {
                if (!j.contains(field))
                    throw goofloc::invalid_argument(std::string("config.") + field + ": unknown field");
                text = j[field].dump();
            }
            else
                text = j.dump(2);
            if (needed)
                *needed = text.size() + 1;
            if (buf && capacity > 0)
            {
                if (capacity < text.size() + 1)
                    throw goofloc::invalid_argument("buffer too small");
                std::memcpy(buf, text.c_str(), text.size() + 1);
            } });
    }

    void goofloc_config_free(goofloc_config *cfg) { delete cfg; }

    // ---- datasets

    goofloc_status goofloc_dataset_simulate(const goofloc_config *cfg, const char *noise_kind, size_t snr_index,
                                            size_t repetition, goofloc_dataset **out)
    {
        return guard([&]
                     {
            need(cfg, "cfg"); need(noise_kind, "noise_kind");
            cfg->value.validate();
            auto kind = goofloc::noise_kind_from_string(noise_kind);
            auto seed = goofloc::repetition_seed(*cfg->value.seed, repetition);
            hand_out(out, goofloc::simulate_cell(cfg->value, seed, kind, snr_index)); });
    }

    goofloc_status goofloc_dataset_create(size_t elements, size_t snapshots, size_t grids, const double *interleaved,
                                          const int *labels, goofloc_dataset **out)
    {
        return guard([&]
                     {
            need(interleaved, "interleaved");
            if (elements < 1 || snapshots < 1 || grids < 1)
                throw goofloc::invalid_argument("dataset: elements, snapshots and grids must be >= 1");
            std::vector<goofloc::snapshot_block> blocks(grids);
            const double *p = interleaved;
            for (std::size_t q = 0; q < grids; ++q)
            {
                blocks[q].data = goofloc::cmatrix(elements, snapshots);
                blocks[q].grid_label = labels ? labels[q] : int(q + 1);
                for (auto &z : blocks[q].data.data())
                {
                    if (!std::isfinite(p[0]) || !std::isfinite(p[1]))
                        throw goofloc::invalid_argument("dataset: non-finite sample");
                    z = {p[0], p[1]};
                    p += 2;
                }
            }
            hand_out(out, std::move(blocks)); });
    }

    goofloc_status goofloc_dataset_load(const char *path, goofloc_dataset **out)
    {
        return guard([&]
                     { need(path, "path"); hand_out(out, goofloc::load_dataset(path)); });
    }

    goofloc_status goofloc_dataset_save(const goofloc_dataset *ds, const char *path)
    {
        return guard([&]
                     { need(ds, "ds"); need(path, "path"); goofloc::save_dataset(path, ds->blocks); });
    }

    goofloc_status goofloc_dataset_shape(const goofloc_dataset *ds, size_t *elements, size_t *snapshots,
                                         size_t *grids)
    {
        return guard([&]
                     {
            need(ds, "ds");
            if (elements)
                *elements = ds->blocks.empty() ? 0 : ds->blocks[0].elements();
            if (snapshots)
                *snapshots = ds->blocks.empty() ? 0 : ds->blocks[0].snapshots();
            if (grids)
                *grids = ds->blocks.size(); });
    }

    goofloc_status goofloc_dataset_block(const goofloc_dataset *ds, size_t index, double *interleaved,
                                         size_t capacity, int *label)
    {
        return guard([&]
                     {
            need(ds, "ds");
            if (index >= ds->blocks.size())
                throw goofloc::invalid_argument("dataset: block index out of range");
            const auto &b = ds->blocks[index];
            if (label)
                *label = b.grid_label;
            if (interleaved)
            {
                if (capacity < 2 * b.data.size())
                    throw goofloc::invalid_argument("dataset: buffer too small");
                for (const auto &z : b.data.data())
                {
                    *interleaved++ = z.real();
                    *interleaved++ = z.imag();
                }
            } });
    }

    void goofloc_dataset_free(goofloc_dataset *ds) { delete ds; }

    // ---- fingerprint stores

    goofloc_status goofloc_goof_build(const goofloc_dataset *ds, const goofloc_config *cfg, goofloc_goof **out)
    {
        return guard([&]
                     {
            need(ds, "ds"); need(cfg, "cfg");
            const auto &c = cfg->value;
            hand_out(out, goofloc::build_goof(ds->blocks, {c.group_count, c.flom_p, c.psd_points})); });
    }

    goofloc_status goofloc_goof_select_groups(const goofloc_goof *g, size_t first, size_t count, goofloc_goof **out)
    {
        return guard([&]
                     { need(g, "g"); hand_out(out, g->value.select_groups(first, count)); });
    }

    goofloc_status goofloc_goof_save(const goofloc_goof *g, const char *dir)
    {
        return guard([&]
                     { need(g, "g"); need(dir, "dir"); goofloc::save_goof(dir, g->value); });
    }

    goofloc_status goofloc_goof_load(const char *dir, goofloc_goof **out)
    {
        return guard([&]
                     { need(dir, "dir"); hand_out(out, goofloc::load_goof(dir)); });
    }

    goofloc_status goofloc_goof_shape(const goofloc_goof *g, size_t *grids, size_t *groups, size_t *elements)
    {
        return guard([&]
                     {
            need(g, "g");
            if (grids)
                *grids = g->value.grid_labels.size();
            if (groups)
                *groups = g->value.group_count;
            if (elements)
                *elements = g->value.elements; });
    }

    goofloc_status goofloc_goof_dimension(const goofloc_goof *g, const char *kind, size_t *dimension)
    {
        return guard([&]
                     {
            need(g, "g"); need(kind, "kind"); need(dimension, "dimension");
            *dimension = g->value.table(goofloc::fingerprint_kind_from_string(kind)).dimension; });
    }

    void goofloc_goof_free(goofloc_goof *g) { delete g; }

    // ---- banks

    goofloc_status goofloc_bank_train(const goofloc_goof *train, const goofloc_config *cfg, uint64_t seed,
                                      goofloc_bank **out)
    {
        return guard([&]
                     {
            need(train, "train"); need(cfg, "cfg");
            const auto &c = cfg->value;
            goofloc::forest_params p;
            p.tree_count = c.tree_count;
            p.depth_limit = c.tree_depth;
            p.spec = {c.primitive, c.feature_subspace_size, c.threshold_candidates};
            p.seed = seed;
            hand_out(out, goofloc::train_bank(train->value, p)); });
    }

    goofloc_status goofloc_bank_save(const goofloc_bank *bank, const char *path)
    {
        return guard([&]
                     { need(bank, "bank"); need(path, "path"); goofloc::save_bank(path, bank->value); });
    }

    goofloc_status goofloc_bank_load(const char *path, goofloc_bank **out)
    {
        return guard([&]
                     { need(path, "path"); hand_out(out, goofloc::load_bank(path)); });
    }

    goofloc_status goofloc_bank_test(const goofloc_bank *bank, const goofloc_goof *test, goofloc_predictions **out)
    {
        return guard([&]
                     {
            need(bank, "bank"); need(test, "test");
            std::vector<goofloc::prediction_matrix> per_grid;
            for (int q : test->value.grid_labels)
                per_grid.push_back(goofloc::test_goof(bank->value, test->value.select_grid(q)));
            hand_out(out, std::move(per_grid)); });
    }

    void goofloc_bank_free(goofloc_bank *bank) { delete bank; }

    // ---- predictions

    goofloc_status goofloc_predictions_save(const goofloc_predictions *p, const char *path)
    {
        return guard([&]
                     { need(p, "p"); need(path, "path"); goofloc::save_predictions(path, p->matrices); });
    }

    goofloc_status goofloc_predictions_load(const char *path, goofloc_predictions **out)
    {
        return guard([&]
                     { need(path, "path"); hand_out(out, goofloc::load_predictions(path)); });
    }

    goofloc_status goofloc_predictions_count(const goofloc_predictions *p, size_t *matrices)
    {
        return guard([&]
                     { need(p, "p"); need(matrices, "matrices"); *matrices = p->matrices.size(); });
    }

    goofloc_status goofloc_predictions_matrix(const goofloc_predictions *p, size_t index, int *labels,
                                              size_t capacity, size_t *rows, size_t *cols, int *true_label)
    {
        return guard([&]
                     {
            need(p, "p");
            if (index >= p->matrices.size())
                throw goofloc::invalid_argument("predictions: matrix index out of range");
            const auto &b = p->matrices[index];
            if (rows)
                *rows = b.rows;
            if (cols)
                *cols = b.cols;
            if (true_label)
                *true_label = b.true_label;
            if (labels)
            {
                if (capacity < b.labels.size())
                    throw goofloc::invalid_argument("predictions: buffer too small");
                std::copy(b.labels.begin(), b.labels.end(), labels);
            } });
    }

    void goofloc_predictions_free(goofloc_predictions *p) { delete p; }

    // ---- fusion

    goofloc_status goofloc_swim(const int *labels, size_t rows, size_t cols, size_t window, int class_count,
                                int true_label, int *predictions, size_t *selected, double *rho)
    {
        return guard([&]
                     {
            need(labels, "labels"); need(predictions, "predictions"); need(selected, "selected");
            goofloc::prediction_matrix b;
            b.rows = rows;
            b.cols = cols;
            b.labels.assign(labels, labels + rows * cols);
            b.true_label = true_label > 0 ? true_label : 0;
            auto r = goofloc::swim(b, window, class_count);
            std::copy(r.predictions.begin(), r.predictions.end(), predictions);
            std::copy(r.selected.begin(), r.selected.end(), selected);
            if (rho && true_label > 0)
                *rho = r.prediction_probability; });
    }

    goofloc_status goofloc_fuse(const goofloc_predictions *p, size_t window, int class_count, const char *out_path,
                                double *mean_rho)
    {
        return guard([&]
                     {
            need(p, "p");
            if (p->matrices.empty())
                throw goofloc::invalid_argument("fuse: no prediction matrices");
            std::string lines;
            double total = 0.0;
            std::size_t scored = 0;
            for (const auto &b : p->matrices)
            {
                auto r = goofloc::swim(b, window, class_count);
                auto rec = goofloc::make_fusion_record(r, b.true_label, b.cols);
                nlohmann::json j = {{"grid", rec.grid},
                                    {"window_length", rec.window_length},
                                    {"predictions", rec.prediction_count},
                                    {"rho", b.true_label > 0 ? nlohmann::json(rec.prediction_probability) : nlohmann::json(nullptr)},
                                    {"selected_histogram", rec.selection_histogram},
                                    {"labels", r.predictions}};
                lines += j.dump() + "\n";
                if (b.true_label > 0)
                {
                    total += r.prediction_probability;
                    ++scored;
                }
            }
            if (out_path)
                goofloc::write_file_atomic(out_path, lines);
            if (mean_rho)
                *mean_rho = scored ? total / double(scored) : -1.0; });
    }

    // ---- sweeps and reports

    goofloc_status goofloc_sweep_snr(const goofloc_config *cfg, size_t jobs, goofloc_report **out)
    {
        return guard([&]
                     { need(cfg, "cfg"); hand_out(out, goofloc::run_snr_sweep(cfg->value, {jobs})); });
    }

    goofloc_status goofloc_sweep_forest(const goofloc_config *cfg, const char *vary, size_t jobs, goofloc_report **out)
    {
        return guard([&]
                     {
            need(cfg, "cfg"); need(vary, "vary");
            auto kind = goofloc::report_kind_from_string(vary);
            hand_out(out, goofloc::run_forest_sweep(cfg->value, kind, {jobs})); });
    }

    goofloc_status goofloc_report_load(const char *path, goofloc_report **out)
    {
        return guard([&]
                     { need(path, "path"); hand_out(out, goofloc::load_report(path)); });
    }

    goofloc_status goofloc_report_save(const goofloc_report *r, const char *path)
    {
        return guard([&]
                     { need(r, "r"); need(path, "path"); goofloc::save_report(path, r->value); });
    }

    goofloc_status goofloc_report_merge(const goofloc_report *const *parts, size_t count, goofloc_report **out)
    {
        return guard([&]
                     {
            need(parts, "parts");
            std::vector<goofloc::report> v;
            for (std::size_t i = 0; i < count; ++i)
            {
                need(parts[i], "parts[i]");
                v.push_back(parts[i]->value);
            }
            hand_out(out, goofloc::merge_reports(v)); });
    }

    goofloc_status goofloc_report_emit(const goofloc_report *r, const char *dir, const char *format)
    {
        return guard([&]
                     {
            need(r, "r"); need(dir, "dir"); need(format, "format");
            std::string f = format;
            if (f != "csv" && f != "json")
                throw goofloc::invalid_argument("report format must be csv or json");
            goofloc::emit_report(r->value, dir, f == "csv" ? goofloc::report_format::csv : goofloc::report_format::json); });
    }

    goofloc_status goofloc_report_cell_count(const goofloc_report *r, size_t *count)
    {
        return guard([&]
                     { need(r, "r"); need(count, "count"); *count = r->value.cells.size(); });
    }

    goofloc_status goofloc_report_cell(const goofloc_report *r, size_t index, const char **noise, double *snr_db,
                                       const char **method, double *mean_rho, double *std_rho, size_t *repetitions)
    {
        return guard([&]
                     {
            need(r, "r");
            if (index >= r->value.cells.size())
                throw goofloc::invalid_argument("report: cell index out of range");
            const auto &c = r->value.cells[index];
            if (noise)
                *noise = goofloc::to_string(c.noise).data(); // literals, NUL-terminated
            if (snr_db)
                *snr_db = c.snr_db;
            if (method)
                *method = c.method.c_str();
            if (mean_rho)
                *mean_rho = c.mean_rho();
            if (std_rho)
                *std_rho = c.std_rho();
            if (repetitions)
                *repetitions = c.rho.size(); });
    }

    goofloc_status goofloc_report_timing_count(const goofloc_report *r, size_t *count)
    {
        return guard([&]
                     { need(r, "r"); need(count, "count"); *count = r->value.timing.size(); });
    }

    goofloc_status goofloc_report_timing(const goofloc_report *r, size_t index, const char **method,
                                         double *train_seconds, double *test_seconds, double *predictions_per_grid)
    {
        return guard([&]
                     {
            need(r, "r");
            if (index >= r->value.timing.size())
                throw goofloc::invalid_argument("report: timing index out of range");
            const auto &t = r->value.timing[index];
            if (method)
                *method = t.method.c_str();
            if (train_seconds)
                *train_seconds = t.train_seconds;
            if (test_seconds)
                *test_seconds = t.test_seconds;
            if (predictions_per_grid)
                *predictions_per_grid = t.predictions_per_grid; });
    }

    void goofloc_report_free(goofloc_report *r) { delete r; }

} // extern "C"

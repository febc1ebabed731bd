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

#ifndef GOOFLOC_H
#define GOOFLOC_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(GOOFLOC_BUILDING)
#define GOOFLOC_API __declspec(dllexport)
#else
#define GOOFLOC_API __declspec(dllimport)
#endif
#else
#define GOOFLOC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C"
{
#endif

    typedef enum goofloc_status
    {
        GOOFLOC_OK = 0,
        GOOFLOC_ERR_INVALID_ARGUMENT = 2,
        GOOFLOC_ERR_FORMAT = 3,
        GOOFLOC_ERR_NUMERICAL = 4,
        GOOFLOC_ERR_IO = 5,
        GOOFLOC_ERR_DEGENERATE_GEOMETRY = 6,
        GOOFLOC_ERR_DEGENERATE_INPUT = 7,
        GOOFLOC_ERR_INTERNAL = 9
    } goofloc_status;

    typedef struct goofloc_config goofloc_config;
    typedef struct goofloc_dataset goofloc_dataset;
    typedef struct goofloc_goof goofloc_goof;
    typedef struct goofloc_bank goofloc_bank;
    typedef struct goofloc_predictions goofloc_predictions;
    typedef struct goofloc_report goofloc_report;

    /* Message of the last failure on the calling thread ("" when none) */
    GOOFLOC_API const char *goofloc_last_error(void);
    /* Byte offset reported with the last GOOFLOC_ERR_FORMAT, 0 otherwise */
    GOOFLOC_API size_t goofloc_last_error_offset(void);
    GOOFLOC_API const char *goofloc_version(void);
    GOOFLOC_API const char *goofloc_status_name(goofloc_status s);

    /* ---- experiment configuration ---- */
    GOOFLOC_API goofloc_status goofloc_config_create(goofloc_config **out);
    GOOFLOC_API goofloc_status goofloc_config_load(const char *path, goofloc_config **out);
    /* value is JSON or a bare word; comma-separated words form a list */
    GOOFLOC_API goofloc_status goofloc_config_set(goofloc_config *cfg, const char *field, const char *value);
    GOOFLOC_API goofloc_status goofloc_config_validate(const goofloc_config *cfg);
    GOOFLOC_API goofloc_status goofloc_config_save(const goofloc_config *cfg, const char *path);
    GOOFLOC_API goofloc_status goofloc_config_hash(const goofloc_config *cfg, uint64_t *hash);
    GOOFLOC_API size_t goofloc_config_field_count(void);
    GOOFLOC_API const char *goofloc_config_field_name(size_t index);
    /* Copies the JSON text of field (or of the whole config when field is NULL) into buf;
       *needed receives the size including the terminator */
    GOOFLOC_API goofloc_status goofloc_config_get(const goofloc_config *cfg, const char *field, char *buf,
                                                  size_t capacity, size_t *needed);
    GOOFLOC_API void goofloc_config_free(goofloc_config *cfg);

    /* ---- snapshot datasets (one noise kind and SNR, all grids) ---- */
    GOOFLOC_API goofloc_status goofloc_dataset_simulate(const goofloc_config *cfg, const char *noise_kind,
                                                        size_t snr_index, size_t repetition, goofloc_dataset **out);
    /* interleaved holds Q blocks of M x L (re, im) pairs, column by column; labels may be NULL (1..Q) */
    GOOFLOC_API goofloc_status goofloc_dataset_create(size_t elements, size_t snapshots, size_t grids,
                                                      const double *interleaved, const int *labels,
                                                      goofloc_dataset **out);
    GOOFLOC_API goofloc_status goofloc_dataset_load(const char *path, goofloc_dataset **out);
    GOOFLOC_API goofloc_status goofloc_dataset_save(const goofloc_dataset *ds, const char *path);
    GOOFLOC_API goofloc_status goofloc_dataset_shape(const goofloc_dataset *ds, size_t *elements,
                                                     size_t *snapshots, size_t *grids);
    GOOFLOC_API goofloc_status goofloc_dataset_block(const goofloc_dataset *ds, size_t index, double *interleaved,
                                                     size_t capacity, int *label);
    GOOFLOC_API void goofloc_dataset_free(goofloc_dataset *ds);

    /* ---- fingerprint stores ---- */
    /* group count, FLOM exponent and PSD points come from cfg */
    GOOFLOC_API goofloc_status goofloc_goof_build(const goofloc_dataset *ds, const goofloc_config *cfg,
                                                  goofloc_goof **out);
    GOOFLOC_API goofloc_status goofloc_goof_select_groups(const goofloc_goof *g, size_t first, size_t count,
                                                          goofloc_goof **out);
    GOOFLOC_API goofloc_status goofloc_goof_save(const goofloc_goof *g, const char *dir);
    GOOFLOC_API goofloc_status goofloc_goof_load(const char *dir, goofloc_goof **out);
    GOOFLOC_API goofloc_status goofloc_goof_shape(const goofloc_goof *g, size_t *grids, size_t *groups,
                                                  size_t *elements);
    /* Feature length of one family ("CMF", "RSSF", "PSDF", "SSF", "FoCF", "FLOMF") */
    GOOFLOC_API goofloc_status goofloc_goof_dimension(const goofloc_goof *g, const char *kind, size_t *dimension);
    GOOFLOC_API void goofloc_goof_free(goofloc_goof *g);

    /* ---- classifier banks ---- */
    /* tree count, depth and split primitive come from cfg */
    GOOFLOC_API goofloc_status goofloc_bank_train(const goofloc_goof *train, const goofloc_config *cfg, uint64_t seed,
                                                  goofloc_bank **out);
    GOOFLOC_API goofloc_status goofloc_bank_save(const goofloc_bank *bank, const char *path);
    GOOFLOC_API goofloc_status goofloc_bank_load(const char *path, goofloc_bank **out);
    /* One prediction matrix per grid of the test store */
    GOOFLOC_API goofloc_status goofloc_bank_test(const goofloc_bank *bank, const goofloc_goof *test,
                                                 goofloc_predictions **out);
    GOOFLOC_API void goofloc_bank_free(goofloc_bank *bank);

    /* ---- prediction matrices ---- */
    GOOFLOC_API goofloc_status goofloc_predictions_save(const goofloc_predictions *p, const char *path);
    GOOFLOC_API goofloc_status goofloc_predictions_load(const char *path, goofloc_predictions **out);
    GOOFLOC_API goofloc_status goofloc_predictions_count(const goofloc_predictions *p, size_t *matrices);
    /* Row-major Z x H labels of matrix index; rows/cols/true_label may be NULL */
    GOOFLOC_API goofloc_status goofloc_predictions_matrix(const goofloc_predictions *p, size_t index, int *labels,
                                                          size_t capacity, size_t *rows, size_t *cols,
                                                          int *true_label);
    GOOFLOC_API void goofloc_predictions_free(goofloc_predictions *p);

    /* ---- fusion ---- */
    /* SWIM over a row-major rows x cols label matrix. predictions/selected need rows - window + 1
       slots; rho may be NULL and is only written when true_label > 0 */
    GOOFLOC_API goofloc_status goofloc_swim(const int *labels, size_t rows, size_t cols, size_t window,
                                            int class_count, int true_label, int *predictions, size_t *selected,
                                            double *rho);
    /* Fusion records (grid, W, U, rho, selected-column histogram) for every matrix, as JSON lines.
       mean_rho may be NULL. */
    GOOFLOC_API goofloc_status goofloc_fuse(const goofloc_predictions *p, size_t window, int class_count,
                                            const char *out_path, double *mean_rho);

    /* ---- sweeps and reports ---- */
    GOOFLOC_API goofloc_status goofloc_sweep_snr(const goofloc_config *cfg, size_t jobs, goofloc_report **out);
    /* vary: "depth" or "number" */
    GOOFLOC_API goofloc_status goofloc_sweep_forest(const goofloc_config *cfg, const char *vary, size_t jobs,
                                                    goofloc_report **out);
    GOOFLOC_API goofloc_status goofloc_report_load(const char *path, goofloc_report **out);
    GOOFLOC_API goofloc_status goofloc_report_save(const goofloc_report *r, const char *path);
    GOOFLOC_API goofloc_status goofloc_report_merge(const goofloc_report *const *parts, size_t count,
                                                    goofloc_report **out);
    /* format: "csv" or "json" */
    GOOFLOC_API goofloc_status goofloc_report_emit(const goofloc_report *r, const char *dir, const char *format);
    GOOFLOC_API goofloc_status goofloc_report_cell_count(const goofloc_report *r, size_t *count);
    /* Strings stay valid until the report is freed; any output pointer may be NULL */
    GOOFLOC_API goofloc_status goofloc_report_cell(const goofloc_report *r, size_t index, const char **noise,
                                                   double *snr_db, const char **method, double *mean_rho,
                                                   double *std_rho, size_t *repetitions);
    GOOFLOC_API goofloc_status goofloc_report_timing_count(const goofloc_report *r, size_t *count);
    GOOFLOC_API goofloc_status goofloc_report_timing(const goofloc_report *r, size_t index, const char **method,
                                                     double *train_seconds, double *test_seconds,
                                                     double *predictions_per_grid);
    GOOFLOC_API void goofloc_report_free(goofloc_report *r);

#ifdef __cplusplus
}
#endif

#endif

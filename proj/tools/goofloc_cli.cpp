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

// Command-line front end. Talks to the library only through the C API.

#include <cstdio>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "goofloc/goofloc.h"

namespace
{
    namespace fs = std::filesystem;
    using nlohmann::json;

    struct cli_failure
    {
        goofloc_status status;
    };

    int exit_code(goofloc_status s)
    {
        switch (s)
        {
        case GOOFLOC_OK:
            return 0;
        case GOOFLOC_ERR_INVALID_ARGUMENT:
        case GOOFLOC_ERR_DEGENERATE_GEOMETRY:
            return 2;
        case GOOFLOC_ERR_FORMAT:
            return 3;
        case GOOFLOC_ERR_NUMERICAL:
        case GOOFLOC_ERR_DEGENERATE_INPUT:
            return 4;
        default:
            return 1;
        }
    }

    void check(goofloc_status s)
    {
        if (s == GOOFLOC_OK)
            return;
        std::fprintf(stderr, "goofloc: %s: %s", goofloc_status_name(s), goofloc_last_error());
        if (s == GOOFLOC_ERR_FORMAT)
            std::fprintf(stderr, " [offset %zu]", goofloc_last_error_offset());
        std::fprintf(stderr, "\n");
        throw cli_failure{s};
    }

    // Small owning wrapper for the opaque handles
    template <typename T, void (*Free)(T *)>
    struct handle
    {
        T *p = nullptr;
        handle() = default;
        handle(const handle &) = delete;
        handle &operator=(const handle &) = delete;
        handle(handle &&o) noexcept : p(o.p) { o.p = nullptr; }
        ~handle() { Free(p); }
        T **out() { return &p; }
        operator T *() const { return p; }
    };

    using config_h = handle<goofloc_config, goofloc_config_free>;
    using dataset_h = handle<goofloc_dataset, goofloc_dataset_free>;
    using goof_h = handle<goofloc_goof, goofloc_goof_free>;
    using bank_h = handle<goofloc_bank, goofloc_bank_free>;
    using predictions_h = handle<goofloc_predictions, goofloc_predictions_free>;
    using report_h = handle<goofloc_report, goofloc_report_free>;

    std::string dashed(std::string s)
    {
        for (auto &c : s)
            if (c == '_')
                c = '-';
        return s;
    }

    // --config, --set and one --<field> option per configuration field
    struct config_options
    {
        std::string file;
        std::vector<std::string> sets;
        std::map<std::string, std::string> fields;

        void attach(CLI::App *app)
        {
            app->add_option("--config", file, "JSON experiment configuration")->check(CLI::ExistingFile);
            app->add_option("--set", sets, "Override a field, FIELD=VALUE (repeatable)");
            for (std::size_t i = 0; i < goofloc_config_field_count(); ++i)
            {
                std::string name = goofloc_config_field_name(i);
                app->add_option("--" + dashed(name), fields[name], "Config field " + name)->group("Config fields");
            }
        }

        config_h make() const
        {
            config_h cfg;
            if (file.empty())
                check(goofloc_config_create(cfg.out()));
            else
                check(goofloc_config_load(file.c_str(), cfg.out()));
            for (const auto &[name, value] : fields)
                if (!value.empty())
                    check(goofloc_config_set(cfg, name.c_str(), value.c_str()));
            for (const auto &s : sets)
            {
                auto eq = s.find('=');
                if (eq == std::string::npos)
                {
                    std::fprintf(stderr, "goofloc: --set expects FIELD=VALUE, got '%s'\n", s.c_str());
                    throw cli_failure{GOOFLOC_ERR_INVALID_ARGUMENT};
                }
                check(goofloc_config_set(cfg, s.substr(0, eq).c_str(), s.substr(eq + 1).c_str()));
            }
            return cfg;
        }
    };

    json config_field(const goofloc_config *cfg, const char *field)
    {
        std::size_t need = 0;
        check(goofloc_config_get(cfg, field, nullptr, 0, &need));
        std::string buf(need, '\0');
        check(goofloc_config_get(cfg, field, buf.data(), buf.size(), &need));
        buf.resize(need - 1);
        return json::parse(buf);
    }

    void print_report_summary(const goofloc_report *r)
    {
        std::size_t n = 0;
        check(goofloc_report_cell_count(r, &n));
        std::printf("%-10s %8s %-14s %9s %9s %3s\n", "noise", "snr_db", "method", "mean_rho", "std_rho", "n");
        for (std::size_t i = 0; i < n; ++i)
        {
            const char *noise = nullptr, *method = nullptr;
            double snr = 0, mean = 0, sd = 0;
            std::size_t reps = 0;
            check(goofloc_report_cell(r, i, &noise, &snr, &method, &mean, &sd, &reps));
            std::printf("%-10s %8g %-14s %9.4f %9.4f %3zu\n", noise, snr, method, mean, sd, reps);
        }
    }
} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"goofloc: multi-fingerprint fusion toolkit for array-based indoor localization"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(goofloc_version()));

    // simulate
    auto *sim = app.add_subcommand("simulate", "Write snapshot dataset files, one per (noise kind, SNR) cell");
    config_options sim_cfg;
    sim_cfg.attach(sim);
    std::string sim_out, sim_noise;
    std::vector<std::size_t> sim_snr_index;
    std::size_t sim_rep = 0;
    sim->add_option("--out", sim_out, "Output directory")->required();
    sim->add_option("--noise", sim_noise, "Single noise kind (default: every configured kind)");
    sim->add_option("--snr-index", sim_snr_index, "SNR grid indices (default: all)");
    sim->add_option("--repetition", sim_rep, "Repetition index for seeding");

    // build-goof
    auto *bg = app.add_subcommand("build-goof", "Extract the six fingerprint families from a dataset file");
    config_options bg_cfg;
    bg_cfg.attach(bg);
    std::string bg_dataset, bg_out;
    bg->add_option("--dataset", bg_dataset, "Snapshot dataset file")->required()->check(CLI::ExistingFile);
    bg->add_option("--out", bg_out, "Output directory for the fingerprint store")->required();

    // train
    auto *tr = app.add_subcommand("train", "Train one forest per fingerprint family");
    config_options tr_cfg;
    tr_cfg.attach(tr);
    std::string tr_goof, tr_out;
    std::size_t tr_first = 0;
    std::size_t tr_count = 0;
    tr->add_option("--goof", tr_goof, "Fingerprint store directory")->required();
    tr->add_option("--out", tr_out, "Output bank file")->required();
    tr->add_option("--first-group", tr_first, "First training group per grid");
    tr->add_option("--groups", tr_count, "Training groups per grid (default: train_groups)");

    // test
    auto *te = app.add_subcommand("test", "Write per-grid prediction matrices");
    config_options te_cfg;
    te_cfg.attach(te);
    std::string te_goof, te_bank, te_out;
    std::size_t te_first = 0, te_count = 0;
    bool te_first_set = false;
    te->add_option("--goof", te_goof, "Fingerprint store directory")->required();
    te->add_option("--bank", te_bank, "Trained bank file")->required()->check(CLI::ExistingFile);
    te->add_option("--out", te_out, "Output predictions file")->required();
    auto *te_first_opt = te->add_option("--first-group", te_first, "First test group per grid (default: train_groups)");
    te->add_option("--groups", te_count, "Test groups per grid (default: test_groups)");

    // fuse
    auto *fu = app.add_subcommand("fuse", "Run sliding-window fusion over saved prediction matrices");
    std::string fu_pred, fu_out;
    std::size_t fu_window = 5;
    int fu_classes = 0;
    fu->add_option("--predictions", fu_pred, "Predictions file")->required()->check(CLI::ExistingFile);
    fu->add_option("--window", fu_window, "Window length W");
    fu->add_option("--classes", fu_classes, "Grid count Q (default: largest label present)");
    fu->add_option("--out", fu_out, "Fusion records (JSON lines)");

    // sweeps
    auto *ss = app.add_subcommand("sweep-snr", "Prediction probability against SNR for every method");
    config_options ss_cfg;
    ss_cfg.attach(ss);
    std::string ss_out, ss_format = "csv";
    std::size_t ss_jobs = 1;
    ss->add_option("--out", ss_out, "Output directory")->required();
    ss->add_option("--format", ss_format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    ss->add_option("--jobs", ss_jobs, "Worker threads (timings are only comparable with 1)");

    auto *sf = app.add_subcommand("sweep-forest", "RSSF accuracy and timing against tree depth or tree number");
    config_options sf_cfg;
    sf_cfg.attach(sf);
    std::string sf_out, sf_vary = "depth", sf_format = "csv";
    std::size_t sf_jobs = 1;
    sf->add_option("--vary", sf_vary, "depth or number")->check(CLI::IsMember({"depth", "number"}));
    sf->add_option("--out", sf_out, "Output directory")->required();
    sf->add_option("--format", sf_format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    sf->add_option("--jobs", sf_jobs, "Worker threads (timings are only comparable with 1)");

    auto *rp = app.add_subcommand("report", "Merge saved reports and emit CSV or JSON");
    std::vector<std::string> rp_in;
    std::string rp_out, rp_format = "csv";
    rp->add_option("--in", rp_in, "report.json files")->required()->check(CLI::ExistingFile);
    rp->add_option("--out", rp_out, "Output directory")->required();
    rp->add_option("--format", rp_format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError &e)
    {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try
    {
        if (*sim)
        {
            auto cfg = sim_cfg.make();
            check(goofloc_config_validate(cfg));
            std::vector<std::string> noises;
            if (!sim_noise.empty())
                noises.push_back(sim_noise);
            else
                for (const auto &n : config_field(cfg, "noise_kinds"))
                    noises.push_back(n.get<std::string>());
            const json snrs = config_field(cfg, "snr_db");
            if (sim_snr_index.empty())
                for (std::size_t i = 0; i < snrs.size(); ++i)
                    sim_snr_index.push_back(i);
            fs::create_directories(sim_out);
            for (const auto &n : noises)
                for (auto s : sim_snr_index)
                {
                    dataset_h ds;
                    check(goofloc_dataset_simulate(cfg, n.c_str(), s, sim_rep, ds.out()));
                    std::string snr = s < snrs.size() ? (snrs[s].is_string() ? snrs[s].get<std::string>() : snrs[s].dump()) : "?";
                    fs::path file = fs::path(sim_out) / ("snap_" + n + "_snr" + snr + "_rep" + std::to_string(sim_rep) + ".goofsnap");
                    check(goofloc_dataset_save(ds, file.string().c_str()));
                    std::printf("%s\n", file.string().c_str());
                }
        }
        else if (*bg)
        {
            auto cfg = bg_cfg.make();
            dataset_h ds;
            check(goofloc_dataset_load(bg_dataset.c_str(), ds.out()));
            goof_h g;
            check(goofloc_goof_build(ds, cfg, g.out()));
            check(goofloc_goof_save(g, bg_out.c_str()));
            std::size_t grids = 0, groups = 0, m = 0;
            check(goofloc_goof_shape(g, &grids, &groups, &m));
            std::printf("%zu grids x %zu groups, M=%zu -> %s\n", grids, groups, m, bg_out.c_str());
        }
        else if (*tr)
        {
            auto cfg = tr_cfg.make();
            check(goofloc_config_validate(cfg));
            if (tr_count == 0)
                tr_count = config_field(cfg, "train_groups").get<std::size_t>();
            goof_h all, train;
            check(goofloc_goof_load(tr_goof.c_str(), all.out()));
            check(goofloc_goof_select_groups(all, tr_first, tr_count, train.out()));
            bank_h bank;
            check(goofloc_bank_train(train, cfg, config_field(cfg, "seed").get<std::uint64_t>(), bank.out()));
            check(goofloc_bank_save(bank, tr_out.c_str()));
        }
        else if (*te)
        {
            auto cfg = te_cfg.make();
            te_first_set = te_first_opt->count() > 0;
            if (!te_first_set)
                te_first = config_field(cfg, "train_groups").get<std::size_t>();
            if (te_count == 0)
                te_count = config_field(cfg, "test_groups").get<std::size_t>();
            goof_h all, test;
            check(goofloc_goof_load(te_goof.c_str(), all.out()));
            check(goofloc_goof_select_groups(all, te_first, te_count, test.out()));
            bank_h bank;
            check(goofloc_bank_load(te_bank.c_str(), bank.out()));
            predictions_h p;
            check(goofloc_bank_test(bank, test, p.out()));
            check(goofloc_predictions_save(p, te_out.c_str()));
        }
        else if (*fu)
        {
            predictions_h p;
            check(goofloc_predictions_load(fu_pred.c_str(), p.out()));
            if (fu_classes == 0)
            {
                std::size_t n = 0;
                check(goofloc_predictions_count(p, &n));
                for (std::size_t i = 0; i < n; ++i)
                {
                    std::size_t rows = 0, cols = 0;
                    int truth = 0;
                    check(goofloc_predictions_matrix(p, i, nullptr, 0, &rows, &cols, &truth));
                    std::vector<int> labels(rows * cols);
                    check(goofloc_predictions_matrix(p, i, labels.data(), labels.size(), nullptr, nullptr, nullptr));
                    for (int l : labels)
                        fu_classes = std::max(fu_classes, l);
                    fu_classes = std::max(fu_classes, truth);
                }
            }
            double mean = -1.0;
            check(goofloc_fuse(p, fu_window, fu_classes, fu_out.empty() ? nullptr : fu_out.c_str(), &mean));
            if (mean >= 0)
                std::printf("mean prediction probability (W=%zu): %.4f\n", fu_window, mean);
        }
        else if (*ss || *sf)
        {
            const bool snr = bool(*ss);
            auto cfg = (snr ? ss_cfg : sf_cfg).make();
            const std::string &out = snr ? ss_out : sf_out;
            report_h r;
            if (snr)
                check(goofloc_sweep_snr(cfg, ss_jobs, r.out()));
            else
                check(goofloc_sweep_forest(cfg, sf_vary.c_str(), sf_jobs, r.out()));
            fs::create_directories(out);
            check(goofloc_report_save(r, (fs::path(out) / "report.json").string().c_str()));
            check(goofloc_report_emit(r, out.c_str(), (snr ? ss_format : sf_format).c_str()));
            print_report_summary(r);
        }
        else if (*rp)
        {
            std::vector<report_h> parts(rp_in.size());
            std::vector<const goofloc_report *> raw;
            for (std::size_t i = 0; i < rp_in.size(); ++i)
            {
                check(goofloc_report_load(rp_in[i].c_str(), parts[i].out()));
                raw.push_back(parts[i]);
            }
            report_h merged;
            check(goofloc_report_merge(raw.data(), raw.size(), merged.out()));
            check(goofloc_report_emit(merged, rp_out.c_str(), rp_format.c_str()));
            print_report_summary(merged);
        }
    }
    catch (const cli_failure &f)
    {
        return exit_code(f.status);
    }
    catch (const fs::filesystem_error &e)
    {
        std::fprintf(stderr, "goofloc: %s\n", e.what());
        return 1;
    }
    return 0;
}

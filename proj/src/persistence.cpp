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

#include "goofloc/persistence.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "goofloc/error.hpp"

namespace goofloc
{
    namespace fs = std::filesystem;
    using nlohmann::json;

    namespace
    {
        constexpr int goof_version = 1;
        constexpr int predictions_version = 1;

        void put_f64(std::string &out, double v)
        {
            auto bits = std::bit_cast<std::uint64_t>(v);
            char b[8];
            for (int i = 0; i < 8; ++i)
                b[i] = char((bits >> (8 * i)) & 0xFF);
            out.append(b, 8);
        }

        double get_f64(const char *p)
        {
            std::uint64_t bits = 0;
            for (int i = 0; i < 8; ++i)
                bits |= std::uint64_t(static_cast<unsigned char>(p[i])) << (8 * i);
            return std::bit_cast<double>(bits);
        }

        json snr_to_json(double snr)
        {
            if (std::isinf(snr) && snr > 0)
                return "inf";
            return snr;
        }

        double snr_from_json(const json &j)
        {
            if (j.is_null() || (j.is_string() && j.get<std::string>() == "inf"))
                return noiseless_snr;
            return j.get<double>();
        }

        template <typename F>
        auto with_json_errors(std::size_t base_offset, F &&body)
        {
            try
            {
                return body();
            }
            catch (const json::parse_error &e)
            {
                throw format_error(std::string("malformed metadata: ") + e.what(), base_offset + e.byte);
            }
            catch (const json::exception &e)
            {
                throw format_error(std::string("invalid metadata: ") + e.what(), base_offset);
            }
        }
    } // namespace

    std::string read_file(const fs::path &file)
    {
        std::ifstream in(file, std::ios::binary);
        if (!in)
            throw io_error("cannot open '" + file.string() + "' for reading");
        std::ostringstream ss;
        ss << in.rdbuf();
        if (in.bad())
            throw io_error("read failure on '" + file.string() + "'");
        return std::move(ss).str();
    }

    void write_file_atomic(const fs::path &file, std::string_view bytes)
    {
        fs::path tmp = file;
        tmp += ".tmp";
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            if (!out)
                throw io_error("cannot open '" + tmp.string() + "' for writing");
            out.write(bytes.data(), std::streamsize(bytes.size()));
            out.flush();
            if (!out)
                throw io_error("write failure on '" + tmp.string() + "'");
        }
        std::error_code ec;
        fs::rename(tmp, file, ec);
        if (ec)
        {
            fs::remove(tmp, ec);
            throw io_error("cannot move '" + tmp.string() + "' to '" + file.string() + "'");
        }
    }

    // ---------------------------------------------------------------------------------------------
    // Snapshot datasets

    std::string encode_dataset(std::span<const snapshot_block> blocks)
    {
        if (blocks.empty())
            throw invalid_argument("dataset: no blocks to write");
        const std::size_t M = blocks[0].elements(), L = blocks[0].snapshots();
        json labels = json::array(), power = json::array();
        for (const auto &b : blocks)
        {
            if (b.elements() != M || b.snapshots() != L)
                throw invalid_argument("dataset: all blocks must share the same M x L shape");
            if (b.noise != blocks[0].noise || !(b.snr_db == blocks[0].snr_db))
                throw invalid_argument("dataset: blocks mix noise settings");
            labels.push_back(b.grid_label);
            power.push_back(std::isnan(b.signal_power) ? json(nullptr) : json(b.signal_power));
        }
        json header = {{"version", dataset_version},
                       {"M", M},
                       {"L", L},
                       {"Q", blocks.size()},
                       {"noise_kind", to_string(blocks[0].noise)},
                       {"snr_db", snr_to_json(blocks[0].snr_db)},
                       {"grid_labels", labels},
                       {"signal_power", power}};

        std::string out;
        out.reserve(64 + blocks.size() * M * L * 16);
        out.append(dataset_magic);
        out.push_back('\n');
        out.append(header.dump());
        out.push_back('\n');
        for (const auto &b : blocks)
            for (const auto &z : b.data.data())
            {
                put_f64(out, z.real());
                put_f64(out, z.imag());
            }
        return out;
    }

    std::vector<snapshot_block> decode_dataset(std::string_view bytes)
    {
        const std::size_t magic_len = dataset_magic.size() + 1;
        if (bytes.size() < magic_len || bytes.substr(0, dataset_magic.size()) != dataset_magic ||
            bytes[dataset_magic.size()] != '\n')
            throw format_error("dataset: missing GOOF-SNAP magic", 0);

        const std::size_t eol = bytes.find('\n', magic_len);
        if (eol == std::string_view::npos)
            throw format_error("dataset: unterminated metadata line", bytes.size());
        const std::string_view header_text = bytes.substr(magic_len, eol - magic_len);

        std::size_t M = 0, L = 0, Q = 0;
        noise_kind noise = noise_kind::none;
        double snr = noiseless_snr;
        std::vector<int> labels;
        std::vector<double> power;
        with_json_errors(magic_len, [&]
                         {
            json h = json::parse(header_text.begin(), header_text.end());
            if (h.at("version").get<int>() != dataset_version)
                throw format_error("dataset: unsupported version " + h.at("version").dump(), magic_len);
            M = h.at("M").get<std::size_t>();
            L = h.at("L").get<std::size_t>();
            Q = h.at("Q").get<std::size_t>();
            try
            {
                noise = noise_kind_from_string(h.at("noise_kind").get<std::string>());
            }
            catch (const invalid_argument &e)
            {
                throw format_error(std::string("dataset: ") + e.what(), magic_len);
            }
            snr = snr_from_json(h.value("snr_db", json(nullptr)));
            if (h.contains("grid_labels"))
                labels = h.at("grid_labels").get<std::vector<int>>();
            else
                for (std::size_t q = 0; q < Q; ++q)
                    labels.push_back(int(q + 1));
            if (h.contains("signal_power"))
                for (const auto &p : h.at("signal_power"))
                    power.push_back(p.is_null() ? std::numeric_limits<double>::quiet_NaN() : p.get<double>());
            else
                power.assign(Q, std::numeric_limits<double>::quiet_NaN());
            return 0; });

        if (M < 1 || L < 1 || Q < 1)
            throw format_error("dataset: M, L and Q must be positive", magic_len);
        if (labels.size() != Q || power.size() != Q)
            throw format_error("dataset: grid_labels/signal_power length differs from Q", magic_len);

        const std::size_t data_start = eol + 1;
        const std::size_t per_block = M * L * 16;
        const std::size_t expected = data_start + Q * per_block;
        if (bytes.size() < expected)
            throw format_error("dataset: truncated payload, expected " + std::to_string(expected) + " bytes, got " +
                                   std::to_string(bytes.size()),
                               bytes.size());
        if (bytes.size() > expected)
            throw format_error("dataset: trailing bytes after payload", expected);

        std::vector<snapshot_block> blocks(Q);
        const char *p = bytes.data() + data_start;
        for (std::size_t q = 0; q < Q; ++q)
        {
            auto &b = blocks[q];
            b.data = cmatrix(M, L);
            b.grid_label = labels[q];
            b.noise = noise;
            b.snr_db = snr;
            b.signal_power = power[q];
            for (auto &z : b.data.data())
            {
                double re = get_f64(p), im = get_f64(p + 8);
                if (!std::isfinite(re) || !std::isfinite(im))
                    throw format_error("dataset: non-finite sample", std::size_t(p - bytes.data()));
                z = {re, im};
                p += 16;
            }
        }
        return blocks;
    }

    void save_dataset(const fs::path &file, std::span<const snapshot_block> blocks)
    {
        write_file_atomic(file, encode_dataset(blocks));
    }

    std::vector<snapshot_block> load_dataset(const fs::path &file)
    {
        return decode_dataset(read_file(file));
    }

    // ---------------------------------------------------------------------------------------------
    // GOOF directory

    void save_goof(const fs::path &dir, const goof &g)
    {
        g.validate();
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (ec)
            throw io_error("cannot create directory '" + dir.string() + "'");

        json tables = json::array();
        for (const auto &t : g.tables)
        {
            std::string file = std::string(to_string(t.kind)) + ".f64";
            std::string bytes;
            bytes.reserve(t.rows() * (t.dimension + 1) * 8);
            for (std::size_t r = 0; r < t.rows(); ++r)
            {
                for (double x : t.row(r))
                    put_f64(bytes, x);
                put_f64(bytes, double(t.labels[r]));
            }
            write_file_atomic(dir / file, bytes);
            tables.push_back({{"kind", to_string(t.kind)}, {"dimension", t.dimension}, {"rows", t.rows()}, {"file", file}});
        }
        json index = {{"format", "goofloc-goof"},
                      {"version", goof_version},
                      {"elements", g.elements},
                      {"group_count", g.group_count},
                      {"snapshots_per_group", g.snapshots_per_group},
                      {"psd_points", g.psd_points},
                      {"flom_p", g.flom_p},
                      {"grid_labels", g.grid_labels},
                      {"noise_kind", to_string(g.noise)},
                      {"snr_db", snr_to_json(g.snr_db)},
                      {"tables", tables}};
        write_file_atomic(dir / "goof.json", index.dump(2) + "\n");
    }

    goof load_goof(const fs::path &dir)
    {
        const std::string text = read_file(dir / "goof.json");
        goof g;
        std::vector<std::pair<std::string, std::size_t>> files;
        with_json_errors(0, [&]
                         {
            json j = json::parse(text);
            if (j.value("format", "") != "goofloc-goof")
                throw format_error("goof: missing goofloc-goof format tag", 0);
            if (j.at("version").get<int>() != goof_version)
                throw format_error("goof: unsupported version", 0);
            g.elements = j.at("elements").get<std::size_t>();
            g.group_count = j.at("group_count").get<std::size_t>();
            g.snapshots_per_group = j.at("snapshots_per_group").get<std::size_t>();
            g.psd_points = j.at("psd_points").get<std::size_t>();
            g.flom_p = j.at("flom_p").get<double>();
            g.grid_labels = j.at("grid_labels").get<std::vector<int>>();
            g.noise = noise_kind_from_string(j.at("noise_kind").get<std::string>());
            g.snr_db = snr_from_json(j.at("snr_db"));
            const auto &tables = j.at("tables");
            if (tables.size() != fingerprint_kind_count)
                throw format_error("goof: expected six fingerprint tables", 0);
            for (std::size_t i = 0; i < fingerprint_kind_count; ++i)
            {
                auto &t = g.tables[i];
                t.kind = fingerprint_kind_from_string(tables[i].at("kind").get<std::string>());
                if (t.kind != all_fingerprint_kinds[i])
                    throw format_error("goof: tables out of order", 0);
                t.dimension = tables[i].at("dimension").get<std::size_t>();
                files.emplace_back(tables[i].at("file").get<std::string>(), tables[i].at("rows").get<std::size_t>());
            }
            return 0; });

        for (std::size_t i = 0; i < fingerprint_kind_count; ++i)
        {
            auto &t = g.tables[i];
            const auto &[name, rows] = files[i];
            if (fs::path(name).has_parent_path())
                throw format_error("goof: table file must be a plain file name", 0);
            const std::string bytes = read_file(dir / name);
            const std::size_t stride = (t.dimension + 1) * 8;
            if (bytes.size() != rows * stride)
                throw format_error("goof: " + name + " has " + std::to_string(bytes.size()) + " bytes, expected " +
                                       std::to_string(rows * stride),
                                   std::min(bytes.size(), rows * stride));
            t.features.reserve(rows * t.dimension);
            for (std::size_t r = 0; r < rows; ++r)
            {
                const char *p = bytes.data() + r * stride;
                for (std::size_t c = 0; c < t.dimension; ++c)
                    t.features.push_back(get_f64(p + 8 * c));
                double label = get_f64(p + 8 * t.dimension);
                if (!(label >= 1.0) || label != std::floor(label) || label > 2147483647.0)
                    throw format_error("goof: invalid label in " + name, r * stride + 8 * t.dimension);
                t.labels.push_back(int(label));
            }
        }
        try
        {
            g.validate();
        }
        catch (const error &e)
        {
            throw format_error(std::string("goof: inconsistent store: ") + e.what(), 0);
        }
        return g;
    }

    // ---------------------------------------------------------------------------------------------

    void save_bank(const fs::path &file, const classifier_bank &bank)
    {
        write_file_atomic(file, serialize_bank(bank));
    }

    classifier_bank load_bank(const fs::path &file)
    {
        return parse_bank(read_file(file));
    }

    std::string serialize_predictions(std::span<const prediction_matrix> per_grid)
    {
        json order = json::array();
        for (auto k : all_fingerprint_kinds)
            order.push_back(to_string(k));
        json mats = json::array();
        for (const auto &b : per_grid)
            mats.push_back({{"true_label", b.true_label}, {"rows", b.rows}, {"cols", b.cols}, {"labels", b.labels}});
        return json{{"format", "goofloc-predictions"},
                    {"version", predictions_version},
                    {"columns", order},
                    {"matrices", mats}}
                   .dump();
    }

    std::vector<prediction_matrix> parse_predictions(std::string_view text)
    {
        return with_json_errors(0, [&]
                                {
            json j = json::parse(text.begin(), text.end());
            if (j.value("format", "") != "goofloc-predictions")
                throw format_error("predictions: missing goofloc-predictions format tag", 0);
            if (j.at("version").get<int>() != predictions_version)
                throw format_error("predictions: unsupported version", 0);
            std::vector<prediction_matrix> out;
            for (const auto &m : j.at("matrices"))
            {
                prediction_matrix b;
                b.true_label = m.at("true_label").get<int>();
                b.rows = m.at("rows").get<std::size_t>();
                b.cols = m.at("cols").get<std::size_t>();
                b.labels = m.at("labels").get<std::vector<int>>();
                if (b.labels.size() != b.rows * b.cols || b.rows == 0 || b.cols == 0)
                    throw format_error("predictions: matrix shape does not match its label count", 0);
                for (int l : b.labels)
                    if (l < 1)
                        throw format_error("predictions: labels must be positive", 0);
                out.push_back(std::move(b));
            }
            return out; });
    }

    void save_predictions(const fs::path &file, std::span<const prediction_matrix> per_grid)
    {
        write_file_atomic(file, serialize_predictions(per_grid));
    }

    std::vector<prediction_matrix> load_predictions(const fs::path &file)
    {
        return parse_predictions(read_file(file));
    }

} // namespace goofloc

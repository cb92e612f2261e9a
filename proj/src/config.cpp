// SPDX-License-Identifier: Apache-2.0
//
// csirate: mismatch-aware rate-distortion allocation for CSI feedback
// Copyright (C) 2026 The csirate Authors
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

#include "csirate/config.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

namespace csirate
{
    namespace
    {
        std::string trim(const std::string &s)
        {
            const auto b = s.find_first_not_of(" \t\r\n");
            if (b == std::string::npos)
                return {};
            const auto e = s.find_last_not_of(" \t\r\n");
            return s.substr(b, e - b + 1);
        }

        std::vector<std::string> split_list(const std::string &value)
        {
            std::string spaced = value;
            for (char &c : spaced)
                if (c == ',')
                    c = ' ';
            std::istringstream in(spaced);
            std::vector<std::string> out;
            for (std::string tok; in >> tok;)
                out.push_back(tok);
            return out;
        }

        double to_double(const std::string &tok, std::size_t line)
        {
            errno = 0;
            char *end = nullptr;
            const double v = std::strtod(tok.c_str(), &end);
            if (tok.empty() || end != tok.c_str() + tok.size() || errno == ERANGE || !std::isfinite(v))
                throw ParseError("'" + tok + "' is not a finite number", line);
            return v;
        }

        long long to_integer(const std::string &tok, std::size_t line)
        {
            errno = 0;
            char *end = nullptr;
            const long long v = std::strtoll(tok.c_str(), &end, 10);
            if (tok.empty() || end != tok.c_str() + tok.size() || errno == ERANGE)
                throw ParseError("'" + tok + "' is not an integer", line);
            return v;
        }

        int to_int(const std::string &tok, std::size_t line)
        {
            const long long v = to_integer(tok, line);
            if (v < -2147483647LL || v > 2147483647LL)
                throw ParseError("'" + tok + "' is out of range", line);
            return static_cast<int>(v);
        }

        std::uint64_t to_u64(const std::string &tok, std::size_t line)
        {
            errno = 0;
            char *end = nullptr;
            if (!tok.empty() && tok[0] == '-')
                throw ParseError("'" + tok + "' is not an unsigned integer", line);
            const unsigned long long v = std::strtoull(tok.c_str(), &end, 0);
            if (tok.empty() || end != tok.c_str() + tok.size() || errno == ERANGE)
                throw ParseError("'" + tok + "' is not an unsigned integer", line);
            return v;
        }

        bool to_bool(const std::string &tok, std::size_t line)
        {
            if (tok == "true" || tok == "yes" || tok == "1" || tok == "on")
                return true;
            if (tok == "false" || tok == "no" || tok == "0" || tok == "off")
                return false;
            throw ParseError("'" + tok + "' is not a boolean", line);
        }

        std::string single(const std::string &value, std::size_t line)
        {
            const auto toks = split_list(value);
            if (toks.size() != 1)
                throw ParseError("expected a single value", line);
            return toks.front();
        }

        std::vector<double> to_doubles(const std::string &value, std::size_t line)
        {
            std::vector<double> out;
            for (const std::string &tok : split_list(value))
                out.push_back(to_double(tok, line));
            if (out.empty())
                throw ParseError("expected at least one value", line);
            return out;
        }

        std::string fmt(double v)
        {
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.12g", v);
            return buf;
        }

        std::string join(const std::vector<double> &values)
        {
            std::string out;
            for (std::size_t i = 0; i < values.size(); ++i)
                out += (i ? ", " : "") + fmt(values[i]);
            return out;
        }
    } // namespace

    std::vector<double> default_rate_grid()
    {
        std::vector<double> grid;
        constexpr int points = 16;
        for (int k = 0; k < points; ++k)
        {
            const double v = 8.0 * std::pow(400.0 / 8.0, static_cast<double>(k) / (points - 1));
            const double scale = std::pow(10.0, std::floor(std::log10(v)) - 2.0);
            grid.push_back(std::round(v / scale) * scale);
        }
        return grid;
    }

    ExperimentConfig::ExperimentConfig() : rate_grid_bits(default_rate_grid()) {}

    void ExperimentConfig::validate() const
    {
        if (antennas < 1 || subcarriers < 1 || paths < 1)
            throw ConfigError("antennas, subcarriers and paths must be at least 1");
        if (delay_spread < 0.0)
            throw ConfigError("delay_spread must be non-negative");
        if (pilot_symbols < 0 || probed_subcarriers < 0 || probed_subcarriers > subcarriers)
            throw ConfigError("pilot layout needs T_p >= 0 and 0 <= N_p <= N");
        if (sigma_delta_db.empty())
            throw ConfigError("sigma_delta_db list is empty");
        for (double s : sigma_delta_db)
            if (s < 0.0)
                throw ConfigError("sigma_delta_db entries must be non-negative");
        if (rate_grid_bits.empty())
            throw ConfigError("rate_grid_bits is empty");
        for (std::size_t i = 0; i < rate_grid_bits.size(); ++i)
        {
            if (rate_grid_bits[i] < 0.0)
                throw ConfigError("rate_grid_bits entries must be non-negative");
            if (i > 0 && !(rate_grid_bits[i] > rate_grid_bits[i - 1]))
                throw ConfigError("rate_grid_bits must be strictly increasing");
        }
        if (fixed_rate_bits < 0.0)
            throw ConfigError("fixed_rate_bits must be non-negative");
        if (realizations < 1)
            throw ConfigError("realizations must be at least 1");
        if (schemes.empty())
            throw ConfigError("scheme list is empty");
        if (!(truncation > 0.0 && truncation < 1.0))
            throw ConfigError("truncation must lie in (0, 1)");
        if (!(uniform_strong_rel > 0.0 && uniform_strong_rel < 1.0))
            throw ConfigError("uniform_strong_rel must lie in (0, 1)");
        if (mc_samples < 1)
            throw ConfigError("mc_samples must be at least 1");
        if (mc_tolerance < 0.0)
            throw ConfigError("mc_tolerance must be non-negative");
    }

    ExperimentConfig parse_config(std::istream &in)
    {
        ExperimentConfig cfg;
        std::map<std::string, std::size_t> seen;
        int training_length = -1;
        std::size_t training_line = 0;

        std::string raw;
        for (std::size_t line = 1; std::getline(in, raw); ++line)
        {
            const auto hash = raw.find('#');
            const std::string text = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
            if (text.empty())
                continue;
            const auto eq = text.find('=');
            if (eq == std::string::npos)
                throw ParseError("expected 'key = value'", line);
            const std::string key = trim(text.substr(0, eq));
            const std::string value = trim(text.substr(eq + 1));
            if (key.empty())
                throw ParseError("missing key", line);
            if (value.empty())
                throw ParseError("missing value for '" + key + "'", line);
            if (!seen.emplace(key, line).second)
                throw ParseError("'" + key + "' given twice (first on line " + std::to_string(seen[key]) + ")",
                                 line);

            if (key == "antennas")
                cfg.antennas = to_int(single(value, line), line);
            else if (key == "subcarriers")
                cfg.subcarriers = to_int(single(value, line), line);
            else if (key == "paths")
                cfg.paths = to_int(single(value, line), line);
            else if (key == "delay_spread")
                cfg.delay_spread = to_double(single(value, line), line);
            else if (key == "pilot_symbols")
                cfg.pilot_symbols = to_int(single(value, line), line);
            else if (key == "probed_subcarriers")
                cfg.probed_subcarriers = to_int(single(value, line), line);
            else if (key == "training_length")
            {
                training_length = to_int(single(value, line), line);
                training_line = line;
            }
            else if (key == "snr_dl_db")
                cfg.snr_dl_db = to_double(single(value, line), line);
            else if (key == "sigma_delta_db")
                cfg.sigma_delta_db = to_doubles(value, line);
            else if (key == "rate_grid_bits")
                cfg.rate_grid_bits = to_doubles(value, line);
            else if (key == "fixed_rate_bits")
                cfg.fixed_rate_bits = to_double(single(value, line), line);
            else if (key == "realizations")
                cfg.realizations = to_int(single(value, line), line);
            else if (key == "seed")
                cfg.master_seed = to_u64(single(value, line), line);
            else if (key == "schemes")
            {
                cfg.schemes.clear();
                for (const std::string &tok : split_list(value))
                {
                    try
                    {
                        cfg.schemes.push_back(parse_scheme(tok));
                    }
                    catch (const ConfigError &e)
                    {
                        throw ParseError(e.what(), line);
                    }
                }
            }
            else if (key == "truncation")
                cfg.truncation = to_double(single(value, line), line);
            else if (key == "uniform_strong_rel")
                cfg.uniform_strong_rel = to_double(single(value, line), line);
            else if (key == "calibrate_snr")
                cfg.calibrate_snr = to_bool(single(value, line), line);
            else if (key == "floor_target_db")
                cfg.floor_target_db = to_double(single(value, line), line);
            else if (key == "mc_samples")
            {
                const long long n = to_integer(single(value, line), line);
                if (n < 1)
                    throw ParseError("mc_samples must be at least 1", line);
                cfg.mc_samples = static_cast<std::size_t>(n);
            }
            else if (key == "mc_tolerance")
                cfg.mc_tolerance = to_double(single(value, line), line);
            else if (key == "output")
                cfg.output_path = value;
            else
                throw ParseError("unknown key '" + key + "'", line);
        }

        if (training_length >= 0 && training_length != cfg.training_length())
            throw ParseError("training_length " + std::to_string(training_length) +
                                 " disagrees with pilot_symbols * probed_subcarriers = " +
                                 std::to_string(cfg.training_length()),
                             training_line);
        return cfg;
    }

    ExperimentConfig load_config(const std::string &path)
    {
        std::ifstream in(path);
        if (!in)
            throw std::runtime_error("cannot open config file '" + path + "'");
        return parse_config(in);
    }

    std::vector<std::string> describe_config(const ExperimentConfig &cfg)
    {
        std::vector<std::string> out;
        out.push_back("antennas = " + std::to_string(cfg.antennas));
        out.push_back("subcarriers = " + std::to_string(cfg.subcarriers));
        out.push_back("paths = " + std::to_string(cfg.paths));
        out.push_back("delay_spread = " + fmt(cfg.delay_spread));
        out.push_back("pilot_symbols = " + std::to_string(cfg.pilot_symbols));
        out.push_back("probed_subcarriers = " + std::to_string(cfg.probed_subcarriers));
        out.push_back("training_length = " + std::to_string(cfg.training_length()));
        out.push_back("snr_dl_db = " + fmt(cfg.snr_dl_db));
        out.push_back("sigma_delta_db = " + join(cfg.sigma_delta_db));
        out.push_back("rate_grid_bits = " + join(cfg.rate_grid_bits));
        out.push_back("fixed_rate_bits = " + fmt(cfg.fixed_rate_bits));
        out.push_back("realizations = " + std::to_string(cfg.realizations));
        out.push_back("seed = " + std::to_string(cfg.master_seed));
        std::string schemes;
        for (std::size_t i = 0; i < cfg.schemes.size(); ++i)
            schemes += (i ? ", " : "") + std::string(to_string(cfg.schemes[i]));
        out.push_back("schemes = " + schemes);
        out.push_back("truncation = " + fmt(cfg.truncation));
        out.push_back("uniform_strong_rel = " + fmt(cfg.uniform_strong_rel));
        out.push_back(std::string("calibrate_snr = ") + (cfg.calibrate_snr ? "true" : "false"));
        out.push_back("floor_target_db = " + fmt(cfg.floor_target_db));
        out.push_back("mc_samples = " + std::to_string(cfg.mc_samples));
        out.push_back("mc_tolerance = " + fmt(cfg.mc_tolerance));
        return out;
    }

    EigenvalueInput parse_eigenvalues(std::istream &in)
    {
        EigenvalueInput out;
        std::vector<std::vector<double>> lines;
        std::string raw;
        for (std::size_t line = 1; std::getline(in, raw); ++line)
        {
            const auto hash = raw.find('#');
            std::istringstream tokens(hash == std::string::npos ? raw : raw.substr(0, hash));
            std::vector<double> values;
            for (std::string tok; tokens >> tok;)
            {
                const double v = to_double(tok, line);
                if (!(v > 0.0))
                    throw ParseError("eigenvalue '" + tok + "' is not positive", line);
                values.push_back(v);
            }
            if (values.empty())
                continue;
            if (lines.size() == 2)
                throw ParseError("at most two spectra (λ and λ_dec) are allowed", line);
            if (!lines.empty() && values.size() != lines.front().size())
                throw ParseError("decoder spectrum has " + std::to_string(values.size()) + " values, expected " +
                                     std::to_string(lines.front().size()),
                                 line);
            lines.push_back(std::move(values));
        }
        if (lines.empty())
            throw ParseError("no eigenvalues found", 1);
        out.lambda = lines[0];
        if (lines.size() == 2)
            out.lambda_dec = lines[1];
        return out;
    }

    EigenvalueInput load_eigenvalues(const std::string &path)
    {
        std::ifstream in(path);
        if (!in)
            throw std::runtime_error("cannot open eigenvalue file '" + path + "'");
        return parse_eigenvalues(in);
    }

} // namespace csirate

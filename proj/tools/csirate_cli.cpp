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

// Command-line front end: figure sweeps, single allocations, verification and
// snr calibration. Run `csirate --help` for the subcommands.

#include "csirate/allocator.hpp"
#include "csirate/config.hpp"
#include "csirate/harness.hpp"
#include "csirate/rd_eval.hpp"
#include "csirate/rng.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>

using namespace csirate;

namespace
{
    struct CommonOptions
    {
        std::string config_path;
        std::optional<std::uint64_t> seed;
        std::string out_path;
        int jobs = 1;
        std::string format = "csv";
    };

    void add_common(CLI::App *cmd, CommonOptions &opt)
    {
        cmd->add_option("--config", opt.config_path, "Experiment config file (key = value)")->check(CLI::ExistingFile);
        cmd->add_option("--seed", opt.seed, "Master seed, overrides the config");
        cmd->add_option("--out", opt.out_path, "Output path, '-' or empty for stdout");
        cmd->add_option("--jobs", opt.jobs, "Worker threads")->check(CLI::PositiveNumber);
        cmd->add_option("--format", opt.format, "Table format")->check(CLI::IsMember({"csv", "tsv"}));
    }

    ExperimentConfig load(const CommonOptions &opt)
    {
        ExperimentConfig cfg = opt.config_path.empty() ? ExperimentConfig{} : load_config(opt.config_path);
        if (opt.seed)
            cfg.master_seed = *opt.seed;
        if (!opt.out_path.empty())
            cfg.output_path = opt.out_path;
        cfg.validate();
        return cfg;
    }

    // Writes through `body` into the configured path or stdout.
    template <class Body>
    void with_output(const ExperimentConfig &cfg, Body body)
    {
        if (cfg.output_path.empty() || cfg.output_path == "-")
        {
            body(std::cout);
            return;
        }
        std::ofstream file(cfg.output_path, std::ios::binary);
        if (!file)
            throw std::runtime_error("cannot open output file '" + cfg.output_path + "'");
        body(file);
        if (!file)
            throw std::runtime_error("writing '" + cfg.output_path + "' failed");
    }

    int run_sweep_command(const std::string &kind, const CommonOptions &opt)
    {
        const ExperimentConfig cfg = load(opt);
        SweepResult result;
        if (kind == "sweep-rate")
            result = run_rate_sweep(cfg, opt.jobs);
        else if (kind == "sweep-mismatch")
            result = run_mismatch_sweep(cfg, opt.jobs);
        else
            result = run_e2e_sweep(cfg, opt.jobs);
        with_output(cfg, [&](std::ostream &out) { write_csv(out, result, cfg, opt.format == "tsv" ? '\t' : ','); });
        if (result.failures > 0)
            std::cerr << "warning: " << result.failures << " row(s) failed to allocate and were left out of averages\n";
        return 0;
    }

    struct AllocateOptions
    {
        std::string lambda_file;
        std::optional<double> rate;
        std::string scheme = "rrwf";
        double sigma_delta = 0.0;
        bool json = false;
    };

    int run_allocate(const CommonOptions &opt, const AllocateOptions &a)
    {
        const ExperimentConfig cfg = load(opt);
        const Scheme scheme = parse_scheme(a.scheme);
        const double rate = a.rate.value_or(cfg.fixed_rate_bits);

        SpectrumPair pair;
        double estimate_trace = 0.0, d_mmse = 0.0, prior_trace = 0.0;
        if (!a.lambda_file.empty())
        {
            const EigenvalueInput in = load_eigenvalues(a.lambda_file);
            pair.lambda_true = in.lambda;
            pair.n_active = in.lambda.size();
            pair.basis = CMatrix::Identity(static_cast<Eigen::Index>(pair.n_active),
                                           static_cast<Eigen::Index>(pair.n_active));
            if (!in.lambda_dec.empty())
            {
                if (a.sigma_delta != 0.0)
                    std::cerr << "warning: decoder spectrum given in the file, --sigma-delta ignored\n";
                pair.lambda_dec = in.lambda_dec;
            }
            else
            {
                pair.lambda_dec = inject_mismatch(
                    pair.lambda_true,
                    MismatchSpec{a.sigma_delta, derive_seed(cfg.master_seed, {stream::mismatch, 0})});
            }
            for (double v : pair.lambda_true)
                estimate_trace += v;
            prior_trace = estimate_trace;
        }
        else
        {
            const Realization real = build_realization(cfg, 0, cfg.snr_dl_db);
            pair = real.mismatched(a.sigma_delta);
            estimate_trace = real.estimate_trace;
            d_mmse = real.d_mmse;
            prior_trace = real.prior_trace;
        }

        const Allocation alloc = allocate(scheme, pair, rate, cfg);
        const DistortionReport rep = evaluate_allocation(pair, alloc, estimate_trace, d_mmse, prior_trace);

        with_output(cfg, [&](std::ostream &out) {
            if (a.json)
            {
                nlohmann::json j;
                j["scheme"] = std::string(to_string(scheme));
                j["rate_target_bits"] = rate;
                j["rate_achieved_bits"] = rep.rate_bits;
                j["design_rate_bits"] = rep.design_rate_bits;
                j["multiplier"] = alloc.multiplier;
                j["d_quant"] = rep.d_quant;
                j["nmse_db"] = rep.nmse_db;
                j["d_mmse"] = rep.d_mmse;
                j["nmse_e2e_db"] = rep.nmse_e2e_db;
                j["n_active"] = alloc.active_count();
                nlohmann::json modes = nlohmann::json::array();
                for (std::size_t i = 0; i < alloc.d.size(); ++i)
                {
                    nlohmann::json m;
                    m["lambda"] = pair.lambda_true[i];
                    m["lambda_dec"] = pair.lambda_dec[i];
                    m["d"] = is_active(alloc.d[i]) ? nlohmann::json(alloc.d[i]) : nlohmann::json("inactive");
                    m["r"] = alloc.r[i];
                    m["e"] = rep.per_mode_e[i];
                    modes.push_back(m);
                }
                j["modes"] = modes;
                out << j.dump(2) << '\n';
                return;
            }
            const char sep = opt.format == "tsv" ? '\t' : ',';
            out << "mode" << sep << "lambda" << sep << "lambda_dec" << sep << "d" << sep << "r_bits" << sep << "e\n";
            for (std::size_t i = 0; i < alloc.d.size(); ++i)
                out << i + 1 << sep << format_number(pair.lambda_true[i]) << sep << format_number(pair.lambda_dec[i])
                    << sep << (is_active(alloc.d[i]) ? format_number(alloc.d[i]) : std::string("inactive")) << sep
                    << format_number(alloc.r[i]) << sep << format_number(rep.per_mode_e[i]) << '\n';
            out << "# scheme = " << to_string(scheme) << '\n'
                << "# rate_target_bits = " << format_number(rate) << '\n'
                << "# rate_achieved_bits = " << format_number(rep.rate_bits) << '\n'
                << "# design_rate_bits = " << format_number(rep.design_rate_bits) << '\n'
                << "# multiplier = " << format_number(alloc.multiplier) << '\n'
                << "# d_quant = " << format_number(rep.d_quant) << '\n'
                << "# nmse_db = " << format_number(rep.nmse_db) << '\n'
                << "# d_mmse = " << format_number(rep.d_mmse) << '\n'
                << "# nmse_e2e_db = " << format_number(rep.nmse_e2e_db) << '\n';
        });
        return 0;
    }
} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"csirate: mismatch-aware rate-distortion allocation for CSI feedback"};
    app.set_version_flag("--version", kToolVersion);
    app.require_subcommand(1);

    CommonOptions common;
    AllocateOptions alloc_opt;
    std::optional<std::size_t> samples;
    std::optional<double> tolerance;
    std::optional<double> target_db;

    std::vector<std::pair<std::string, std::string>> sweeps = {
        {"sweep-rate", "NMSE versus feedback rate for every mismatch level"},
        {"sweep-mismatch", "NMSE versus mismatch level at the fixed rate"},
        {"sweep-e2e", "End-to-end NMSE versus rate including the MMSE floor"},
    };
    for (const auto &[name, help] : sweeps)
        add_common(app.add_subcommand(name, help), common);

    CLI::App *alloc_cmd = app.add_subcommand("allocate", "Allocate one spectrum and print the per-mode table");
    add_common(alloc_cmd, common);
    alloc_cmd->add_option("--lambda-file", alloc_opt.lambda_file, "Eigenvalues: line 1 true, optional line 2 decoder")
        ->check(CLI::ExistingFile);
    alloc_cmd->add_option("--rate", alloc_opt.rate, "Rate budget in bits (default: fixed_rate_bits)");
    alloc_cmd->add_option("--scheme", alloc_opt.scheme, "rwf, rrwf, asrwf or uniform")
        ->check(CLI::IsMember({"rwf", "rrwf", "asrwf", "uniform"}));
    alloc_cmd->add_option("--sigma-delta", alloc_opt.sigma_delta, "Mismatch standard deviation in dB");
    alloc_cmd->add_flag("--json", alloc_opt.json, "Print JSON instead of a table");

    CLI::App *verify_cmd = app.add_subcommand("verify", "Monte Carlo and consistency checks of the analytic formulas");
    add_common(verify_cmd, common);
    verify_cmd->add_option("--samples", samples, "Test-channel samples (pilot chain uses samples / 50)");
    verify_cmd->add_option("--tolerance", tolerance, "Relative tolerance");

    CLI::App *cal_cmd = app.add_subcommand("calibrate-snr", "Find the downlink SNR giving the target MMSE floor");
    add_common(cal_cmd, common);
    cal_cmd->add_option("--target", target_db, "Floor target in dB (default: floor_target_db)");

    CLI11_PARSE(app, argc, argv);

    try
    {
        CLI::App *cmd = app.get_subcommands().front();
        const std::string name = cmd->get_name();
        if (name.rfind("sweep-", 0) == 0)
            return run_sweep_command(name, common);
        if (name == "allocate")
            return run_allocate(common, alloc_opt);
        if (name == "verify")
        {
            const ExperimentConfig cfg = load(common);
            const VerifyReport report = run_verify(cfg, samples.value_or(cfg.mc_samples),
                                                   tolerance.value_or(cfg.mc_tolerance), common.jobs);
            with_output(cfg, [&](std::ostream &out) { print_verify(out, report); });
            return report.passed() ? 0 : 1;
        }
        if (name == "calibrate-snr")
        {
            const ExperimentConfig cfg = load(common);
            const Calibration cal = calibrate_snr(cfg, target_db.value_or(cfg.floor_target_db), common.jobs);
            with_output(cfg, [&](std::ostream &out) {
                out << "snr_dl_db = " << format_number(cal.snr_dl_db) << '\n'
                    << "floor_db = " << format_number(cal.floor_db) << '\n'
                    << "iterations = " << cal.iterations << '\n';
            });
            return 0;
        }
    }
    catch (const ParseError &e)
    {
        std::cerr << "parse error: " << e.what() << '\n';
        return 2;
    }
    catch (const std::exception &e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}

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

#include "csirate/harness.hpp"
#include "csirate/mc_verify.hpp"
#include "csirate/pilot_mmse.hpp"
#include "csirate/rng.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <ostream>

namespace csirate
{
    namespace
    {
        VerifyCheck statistical(const std::string &name, const McEstimate &est, double tolerance)
        {
            VerifyCheck c;
            c.name = name;
            c.observed = est.mean;
            c.expected = est.expected;
            c.bound = std::max(3.0 * est.std_error, tolerance * std::abs(est.expected));
            c.passed = est.agrees(tolerance);
            c.note = "n=" + std::to_string(est.samples) + " se=" + format_number(est.std_error);
            return c;
        }

        VerifyCheck deterministic(const std::string &name, double observed, double expected, double tolerance)
        {
            VerifyCheck c;
            c.name = name;
            c.observed = observed;
            c.expected = expected;
            c.bound = tolerance * std::abs(expected);
            c.passed = std::abs(observed - expected) <= c.bound;
            return c;
        }

        VerifyCheck skipped(const std::string &name)
        {
            VerifyCheck c;
            c.name = name;
            c.skipped = true;
            c.passed = true;
            c.note = "insufficient samples";
            return c;
        }

        SpectrumPair single_mode(double lambda, double lambda_dec)
        {
            SpectrumPair p;
            p.basis = CMatrix::Identity(1, 1);
            p.lambda_true = {lambda};
            p.lambda_dec = {lambda_dec};
            p.n_active = 1;
            return p;
        }

        Allocation fixed_noise(double d, double lambda)
        {
            Allocation a;
            a.d = {d};
            a.r = {mode_rate(lambda, d)};
            a.rate_total = a.r[0];
            return a;
        }
    } // namespace

    bool VerifyReport::passed() const
    {
        return std::all_of(checks.begin(), checks.end(), [](const VerifyCheck &c) { return c.passed; });
    }

    VerifyReport run_verify(const ExperimentConfig &cfg, std::size_t samples, double tolerance, int jobs)
    {
        cfg.validate();
        VerifyReport report;
        const bool enough = samples >= 2;
        McConfig mc;
        mc.n_samples = std::max<std::size_t>(samples, 1);
        if (tolerance > 0.0)
            mc.tolerance_rel = tolerance;
        mc.jobs = jobs;

        const Realization real = build_realization(cfg, 0, cfg.snr_dl_db);
        const double sigma = *std::max_element(cfg.sigma_delta_db.begin(), cfg.sigma_delta_db.end());
        const SpectrumPair pair = real.mismatched(sigma);
        const Allocation alloc = rrwf(pair, cfg.fixed_rate_bits);

        // Test channel with mismatched reconstruction.
        if (enough)
        {
            mc.seed = derive_seed(cfg.master_seed, {stream::monte_carlo, 1});
            report.checks.push_back(statistical("mc/test_channel matched lambda=1 d=1",
                                                simulate_test_channel(single_mode(1.0, 1.0), fixed_noise(1.0, 1.0), mc)
                                                    .total,
                                                tolerance));
            mc.seed = derive_seed(cfg.master_seed, {stream::monte_carlo, 2});
            report.checks.push_back(statistical("mc/test_channel mismatched lambda=1 lambda_dec=2 d=1",
                                                simulate_test_channel(single_mode(1.0, 2.0), fixed_noise(1.0, 1.0), mc)
                                                    .total,
                                                tolerance));
            mc.seed = derive_seed(cfg.master_seed, {stream::monte_carlo, 3});
            const TestChannelMc est = simulate_test_channel(pair, alloc, mc);
            for (std::size_t i = 0; i < est.per_mode.size(); ++i)
                report.checks.push_back(statistical("mc/test_channel rrwf mode " + std::to_string(i + 1),
                                                    est.per_mode[i], tolerance));

            McConfig pilot_mc = mc;
            pilot_mc.n_samples = std::max<std::size_t>(samples / 50, 2);
            pilot_mc.seed = derive_seed(cfg.master_seed, {stream::monte_carlo, 4});
            const MultipathParams params = sample_multipath_params(
                cfg.antennas, cfg.subcarriers, cfg.paths, derive_seed(cfg.master_seed, {stream::multipath, 0}),
                cfg.delay_spread);
            const PilotConfig pilots =
                comb_pilot_config(cfg.subcarriers, cfg.pilot_symbols, cfg.probed_subcarriers,
                                  std::pow(10.0, cfg.snr_dl_db / 10.0), derive_seed(cfg.master_seed, {stream::pilots, 0}));
            report.checks.push_back(statistical(
                "mc/pilot_chain", simulate_pilot_chain(synth_covariance(params), pilots, cfg.antennas, pilot_mc),
                tolerance));
        }
        else
        {
            report.checks.push_back(skipped("mc/test_channel"));
            report.checks.push_back(skipped("mc/pilot_chain"));
        }

        // Matrix form against mode form on a random shared eigenbasis.
        {
            const Eigen::Index n = 16;
            Rng rng(derive_seed(cfg.master_seed, {stream::monte_carlo, 5}));
            CMatrix g(n, n);
            for (Eigen::Index i = 0; i < n; ++i)
                for (Eigen::Index j = 0; j < n; ++j)
                    g(i, j) = rng.complex_normal(1.0);
            const CMatrix F = Eigen::HouseholderQR<CMatrix>(g).householderQ();
            Eigen::VectorXd lam(n), dec(n), d(n);
            double rate_modes = 0.0, dist_modes = 0.0;
            for (Eigen::Index i = 0; i < n; ++i)
            {
                lam(i) = std::pow(10.0, rng.uniform(-2.0, 2.0));
                dec(i) = lam(i) * std::pow(10.0, 0.6 * rng.normal());
                d(i) = std::pow(10.0, rng.uniform(-2.0, 2.0));
                rate_modes += mode_rate(lam(i), d(i));
                dist_modes += mode_distortion(lam(i), dec(i), d(i));
            }
            auto shaped = [&](const Eigen::VectorXd &v) -> CMatrix {
                return F * v.cast<cdouble>().asDiagonal() * F.adjoint();
            };
            report.checks.push_back(
                deterministic("theorem/rate_matrix", rate_matrix(shaped(lam), shaped(d)), rate_modes, tolerance));
            report.checks.push_back(deterministic("theorem/distortion_matrix",
                                                  distortion_matrix(shaped(lam), shaped(dec), shaped(d)), dist_modes,
                                                  tolerance));
        }

        // KKT stationarity of the RRWF allocation used above.
        const double kkt_bound = std::min(tolerance, 1e-6);
        for (std::size_t i = 0; i < alloc.d.size(); ++i)
        {
            if (!is_active(alloc.d[i]))
                continue;
            const double lam = pair.lambda_true[i];
            const double dec = pair.lambda_dec[i];
            const double de = mode_distortion_derivative(lam, dec, alloc.d[i]);
            const double dr = alloc.multiplier * mode_rate_derivative(lam, alloc.d[i]);
            VerifyCheck c;
            c.name = "kkt/residual mode " + std::to_string(i + 1);
            c.observed = std::abs(de + dr) / std::max(std::abs(de), std::abs(dr));
            c.expected = 0.0;
            c.bound = kkt_bound;
            c.passed = c.observed <= c.bound;
            report.checks.push_back(c);
        }
        return report;
    }

    void print_verify(std::ostream &out, const VerifyReport &report)
    {
        std::size_t failed = 0;
        for (const VerifyCheck &c : report.checks)
        {
            if (c.skipped)
            {
                out << "SKIP " << c.name << " (" << c.note << ")\n";
                continue;
            }
            out << (c.passed ? "PASS " : "FAIL ") << c.name << "  observed=" << format_number(c.observed)
                << " expected=" << format_number(c.expected) << " allowed=" << format_number(c.bound);
            if (!c.note.empty())
                out << "  " << c.note;
            out << '\n';
            failed += c.passed ? 0 : 1;
        }
        out << (failed == 0 ? "verify: all checks passed\n" : "verify: " + std::to_string(failed) + " check(s) failed\n");
    }

} // namespace csirate

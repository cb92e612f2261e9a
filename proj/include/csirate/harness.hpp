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

#ifndef csirate_harness_H
#define csirate_harness_H

#include "csirate/allocator.hpp"
#include "csirate/config.hpp"
#include "csirate/rd_eval.hpp"
#include "csirate/spectrum.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace csirate
{
    inline constexpr const char *kToolVersion = "0.1.0";

    inline constexpr const char *kCsvHeader =
        "scheme,rate_bits,sigma_delta_db,realization,seed,nmse_db,nmse_e2e_db,d_quant,d_mmse,rate_achieved_bits,n_active";

    // One covariance draw pushed through training, eigendecomposition and truncation.
    //
    // Streams: the multipath draw, the pilot matrix and the mismatch z-scores use
    // derive_seed(master, {stream::multipath | pilots | mismatch, r}), so every sweep
    // point and scheme of realization r sees the same channel and the same z.
    struct Realization
    {
        int index = 0;
        SpectrumPair spectrum;       // matched and truncated
        std::vector<double> z_score; // standard normal per retained mode
        double estimate_trace = 0.0; // tr(C_tilde)
        double d_mmse = 0.0;
        double prior_trace = 0.0;    // tr(C_h)

        double floor_db() const;     // 10 log10(d_mmse / tr(C_h))

        // Spectrum with λ_dec_i = λ_i 10^(σ z_i / 10).
        SpectrumPair mismatched(double sigma_delta_db) const;
    };

    Realization build_realization(const ExperimentConfig &cfg, int index, double snr_dl_db);

    // Allocation of one scheme; uniform uses default_strong_modes(λ, cfg.uniform_strong_rel).
    Allocation allocate(Scheme scheme, const SpectrumPair &spectrum, double rate, const ExperimentConfig &cfg);

    std::uint64_t row_seed(std::uint64_t master, int realization, std::size_t sweep_point, Scheme scheme);

    struct ResultRow
    {
        std::string scheme;    // "<name>" or "<name>/avg"
        double rate_bits = 0.0;
        double sigma_delta_db = 0.0;
        int realization = -1;
        std::uint64_t seed = 0;
        double nmse_db = 0.0;
        double nmse_e2e_db = 0.0;
        double d_quant = 0.0;
        double d_mmse = 0.0;
        double rate_achieved_bits = 0.0;
        double n_active = 0.0;
        bool failed = false;   // allocation error; values are NaN and the row is left out of averages
    };

    struct SweepResult
    {
        std::string kind;             // sweep-rate, sweep-mismatch or sweep-e2e
        double snr_dl_db = 0.0;
        double floor_db = 0.0;        // 10 log10 of the realization average of D_mmse / tr(C_h)
        std::size_t failures = 0;
        std::vector<ResultRow> rows;     // per realization
        std::vector<ResultRow> averages; // per (scheme, σ, rate)
    };

    // Generic sweep over σ x rate for every configured scheme and realization.
    SweepResult run_sweep(const ExperimentConfig &cfg, const std::vector<double> &sigmas,
                          const std::vector<double> &rates, double snr_dl_db, int jobs, const std::string &kind);

    SweepResult run_rate_sweep(const ExperimentConfig &cfg, int jobs);
    SweepResult run_mismatch_sweep(const ExperimentConfig &cfg, int jobs);
    // Uses calibrate_snr first when cfg.calibrate_snr is set.
    SweepResult run_e2e_sweep(const ExperimentConfig &cfg, int jobs);

    struct Calibration
    {
        double snr_dl_db = 0.0;
        double floor_db = 0.0;
        int iterations = 0;
    };

    // Finds snr_dl (dB) such that 10 log10(mean_r D_mmse_r / tr C_h,r) = target_db.
    Calibration calibrate_snr(const ExperimentConfig &cfg, double target_db, int jobs);

    // Metadata lines (prefixed '#'), the fixed header, per-realization rows then averages.
    void write_csv(std::ostream &out, const SweepResult &result, const ExperimentConfig &cfg, char separator = ',');

    // %.12g
    std::string format_number(double value);

    // ---- verify -------------------------------------------------------------

    struct VerifyCheck
    {
        std::string name;
        double observed = 0.0;
        double expected = 0.0;
        double bound = 0.0; // allowed |observed - expected|
        bool passed = false;
        bool skipped = false;
        std::string note;
    };

    struct VerifyReport
    {
        std::vector<VerifyCheck> checks;
        bool passed() const;
    };

    // Monte Carlo checks of the test channel and the pilot chain plus the deterministic
    // matrix-versus-mode and KKT checks. Statistical checks accept max(3 SE, tol |exp|);
    // deterministic ones accept tol relative. Fewer than 2 samples skips the statistical part.
    VerifyReport run_verify(const ExperimentConfig &cfg, std::size_t samples, double tolerance, int jobs);

    void print_verify(std::ostream &out, const VerifyReport &report);

} // namespace csirate

#endif

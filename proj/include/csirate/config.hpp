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

#ifndef csirate_config_H
#define csirate_config_H

#include "csirate/allocator.hpp"
#include "csirate/common.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace csirate
{
    // Experiment description shared by every sweep.
    //
    // File format: one `key = value` per line, `#` starts a comment, list values are
    // separated by commas and/or whitespace. Unknown keys and malformed values raise
    // ParseError with the offending line.
    struct ExperimentConfig
    {
        int antennas = 32;                // M
        int subcarriers = 32;             // N
        int paths = 6;                    // L
        double delay_spread = 0.0;        // W; 0 selects N/4
        int pilot_symbols = 1;            // T_p
        int probed_subcarriers = 8;       // N_p, comb layout
        double snr_dl_db = 10.0;
        std::vector<double> sigma_delta_db = {0.0, 2.0, 4.0, 6.0, 8.0};
        std::vector<double> rate_grid_bits; // defaults to default_rate_grid()
        double fixed_rate_bits = 101.0;
        int realizations = 50;
        std::uint64_t master_seed = 1;
        std::vector<Scheme> schemes = {Scheme::rwf, Scheme::rrwf, Scheme::asrwf, Scheme::uniform};
        double truncation = 1e-10;        // eps_rel of truncate_rank
        double uniform_strong_rel = 1e-3; // modes above this fraction of λ_1 share the uniform budget
        bool calibrate_snr = true;        // sweep-e2e recalibrates snr_dl to hit floor_target_db
        double floor_target_db = -20.0;
        std::size_t mc_samples = 1000000;
        double mc_tolerance = 0.02;
        std::string output_path;

        ExperimentConfig();

        int training_length() const { return pilot_symbols * probed_subcarriers; }

        void validate() const; // throws ConfigError
    };

    // 16 log-spaced budgets from 8 to 400 bits, rounded to 3 significant digits.
    std::vector<double> default_rate_grid();

    ExperimentConfig parse_config(std::istream &in);
    ExperimentConfig load_config(const std::string &path);

    // `key = value` lines that reproduce the configuration.
    std::vector<std::string> describe_config(const ExperimentConfig &cfg);

    // Whitespace-separated positive decimals: first line λ, optional second line λ_dec.
    struct EigenvalueInput
    {
        std::vector<double> lambda;
        std::vector<double> lambda_dec; // empty when not given
    };

    EigenvalueInput parse_eigenvalues(std::istream &in);
    EigenvalueInput load_eigenvalues(const std::string &path);

} // namespace csirate

#endif

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

#ifndef csirate_pilot_mmse_H
#define csirate_pilot_mmse_H

#include "csirate/common.hpp"
#include "csirate/covmodel.hpp"

#include <cstdint>
#include <vector>

namespace csirate
{
    // Downlink training layout. Probed subcarriers are 1-based, as in {1..N}.
    struct PilotConfig
    {
        int pilot_symbols = 1;               // T_p
        std::vector<int> probed_subcarriers; // N_p distinct indices in [1, N]
        double snr_dl = 10.0;                // linear pre-beamforming SNR
        std::uint64_t seed = 0;

        int probed_count() const { return static_cast<int>(probed_subcarriers.size()); }
        int training_length() const { return pilot_symbols * probed_count(); } // L_tr = T_p N_p

        // Throws ConfigError unless every index is in [1, N], indices are distinct,
        // T_p >= 0 and snr_dl > 0.
        void validate(int subcarriers) const;
    };

    // Evenly spaced comb: 0-based subcarrier round(k N / N_p) for k = 0..N_p-1.
    PilotConfig comb_pilot_config(int subcarriers, int pilot_symbols, int probed_count, double snr_dl,
                                  std::uint64_t seed);

    // Pilot matrix with unit-variance CN(0, 1) entries on the probed blocks.
    // Row t + T_p k carries symbol t on the k-th probed subcarrier and touches only
    // that subcarrier's M antenna columns. Entries are drawn row by row, antenna
    // index fastest.
    CMatrix build_unit_pilot_matrix(const PilotConfig &config, int antennas, int subcarriers);

    // L_tr x MN pilot matrix, entries CN(0, snr_dl / M); equal to sqrt(snr_dl / M) times
    // the unit pilot matrix of the same config.
    CMatrix build_pilot_matrix(const PilotConfig &config, int antennas, int subcarriers);

    struct PosteriorModel
    {
        CMatrix c_tilde;      // covariance of the MMSE estimate
        CMatrix factor;       // MN x L_tr, c_tilde = factor factor^H
        double d_mmse = 0.0;  // estimation MSE, tr(C_h - c_tilde)
        double prior_trace = 0.0;

        double estimate_trace() const { return factor.squaredNorm(); }
    };

    // C_tilde = C X^H (X C X^H + I)^{-1} X C and D_mmse = tr(C - C_tilde).
    // The L_tr x L_tr Gram system is factorized by Cholesky; no explicit inverse is formed.
    PosteriorModel mmse_posterior(const ChannelCovariance &prior, const CMatrix &pilots);

    // W = C X^H (X C X^H + I)^{-1}, the linear MMSE filter (MN x L_tr).
    CMatrix mmse_filter(const ChannelCovariance &prior, const CMatrix &pilots);

    // W y for one observation y of length L_tr.
    CVector mmse_estimate(const ChannelCovariance &prior, const CMatrix &pilots, const CVector &observation);

    // Training statistics that make D_mmse cheap to re-evaluate at any SNR for a fixed
    // unit pilot draw X0: with s = snr_dl / M,
    //   D_mmse(s) = tr(C) - s tr((s G0 + I)^{-1} P0),  G0 = X0 C X0^H,  P0 = (X0 C)(X0 C)^H.
    struct TrainingGram
    {
        CMatrix gram;  // G0
        CMatrix cross; // P0
        double prior_trace = 0.0;
        int antennas = 1;

        double d_mmse(double snr_dl) const;
    };

    TrainingGram training_gram(const ChannelCovariance &prior, const CMatrix &unit_pilots, int antennas);

} // namespace csirate

#endif

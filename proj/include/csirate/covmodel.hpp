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

#ifndef csirate_covmodel_H
#define csirate_covmodel_H

#include "csirate/common.hpp"

#include <cstdint>
#include <vector>

namespace csirate
{
    // Wideband multipath description of one user's channel.
    //
    // The stacked channel h = [h[0]; h[1]; ...; h[N-1]] puts the M antennas of
    // subcarrier n in block n, so a path with steering a (length M) and delay
    // response b (length N) contributes the column b ⊗ a.
    struct MultipathParams
    {
        int antennas = 1;               // M
        int subcarriers = 1;            // N
        std::vector<double> gains;      // Path powers, positive, sum to 1
        std::vector<double> angles_deg; // Angles of departure in [-60, 60] degrees
        std::vector<double> delays;     // Delays as a fraction of the maximum delay spread, in [0, 1]
        double delay_spread = 0.0;      // W: phase slope per subcarrier is -2π τ W; 0 selects N/4

        int paths() const { return static_cast<int>(gains.size()); }
        int dim() const { return antennas * subcarriers; }
        double effective_delay_spread() const;

        // Throws ConfigError if any invariant is violated.
        void validate() const;
    };

    struct ChannelCovariance
    {
        CMatrix matrix; // MN x MN, Hermitian PSD

        Eigen::Index dim() const { return matrix.rows(); }
        double trace() const { return matrix.trace().real(); }
    };

    inline double default_delay_spread(int subcarriers) { return subcarriers / 4.0; }

    // Half-wavelength ULA response, entry m = exp(-j π m sin θ).
    CVector steering_vector(double theta_deg, int antennas);

    // Frequency response of a delayed path, entry n = exp(-j 2π n τ W).
    CVector delay_vector(double tau, int subcarriers, double delay_spread);

    // Gains ~ U[0.4, 0.8] renormalized to sum 1, angles ~ U[-60°, 60°], delays ~ U[0, 1].
    // Draw order is all gains, then all angles, then all delays.
    MultipathParams sample_multipath_params(int antennas, int subcarriers, int paths, std::uint64_t seed,
                                            double delay_spread = 0.0);

    // MN x L matrix whose column l is sqrt(γ_l) b_l ⊗ a_l, so that C = U U^H.
    CMatrix multipath_factor(const MultipathParams &params);

    // C = Σ_l γ_l (b_l b_l^H) ⊗ (a_l a_l^H).
    ChannelCovariance synth_covariance(const MultipathParams &params);

    struct CovarianceReport
    {
        double hermitian_deviation = 0.0; // max |C - C^H| entry
        double max_entry = 0.0;           // max |C| entry
        double min_eigenvalue = 0.0;
        double trace = 0.0;
        bool hermitian = false;
        bool psd = false;
        bool positive_trace = false;

        bool passed() const { return hermitian && psd && positive_trace; }
    };

    // Checks the ChannelCovariance invariants: Hermitian within 1e-10 of the largest entry,
    // smallest eigenvalue above -1e-8 trace/dim, positive trace.
    CovarianceReport validate_covariance(const CMatrix &matrix);

} // namespace csirate

#endif

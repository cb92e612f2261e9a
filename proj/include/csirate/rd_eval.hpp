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

#ifndef csirate_rd_eval_H
#define csirate_rd_eval_H

#include "csirate/allocator.hpp"
#include "csirate/common.hpp"
#include "csirate/pilot_mmse.hpp"
#include "csirate/spectrum.hpp"

#include <vector>

namespace csirate
{
    // True MSE of one mode reconstructed with the mismatched gain λ_dec / (λ_dec + d):
    //   e(d) = (λ d^2 + λ_dec^2 d) / (λ_dec + d)^2,  e(inf) = λ.
    double mode_distortion(double lambda, double lambda_dec, double d);

    // de/dd = λ_dec (λ_dec^2 + (2λ - λ_dec) d) / (λ_dec + d)^3.
    double mode_distortion_derivative(double lambda, double lambda_dec, double d);

    // log2 det(I + C_u C_q^{-1}), through the eigenvalues of L^{-1} C_u L^{-H} with
    // C_q = L L^H. Throws std::domain_error if C_q is not positive definite.
    double rate_matrix(const CMatrix &c_u, const CMatrix &c_q);

    // tr(C_u - K C_u - C_u K^H + K (C_u + C_q) K^H) with K = C_ub (C_ub + C_q)^{-1}.
    double distortion_matrix(const CMatrix &c_u, const CMatrix &c_ub, const CMatrix &c_q);

    struct DistortionReport
    {
        double d_quant = 0.0;      // Σ e_i over active modes
        double nmse_db = 0.0;      // 10 log10(d_quant / tr(C_tilde))
        double d_mmse = 0.0;
        double d_e2e = 0.0;        // d_mmse + d_quant
        double nmse_e2e_db = 0.0;  // 10 log10(d_e2e / tr(C_h))
        double rate_bits = 0.0;    // achieved (true) rate
        double design_rate_bits = 0.0;
        double estimate_trace = 0.0;
        double prior_trace = 0.0;
        std::vector<double> per_mode_e;
    };

    DistortionReport evaluate_allocation(const SpectrumPair &spectrum, const Allocation &alloc,
                                         double estimate_trace, double d_mmse, double prior_trace);

    DistortionReport evaluate_allocation(const SpectrumPair &spectrum, const Allocation &alloc,
                                         const PosteriorModel &posterior, double prior_trace);

    // Spectrum-only evaluation: estimate trace Σλ, no estimation error.
    DistortionReport evaluate_allocation(const SpectrumPair &spectrum, const Allocation &alloc);

} // namespace csirate

#endif

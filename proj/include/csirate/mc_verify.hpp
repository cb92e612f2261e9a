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

#ifndef csirate_mc_verify_H
#define csirate_mc_verify_H

#include "csirate/allocator.hpp"
#include "csirate/common.hpp"
#include "csirate/covmodel.hpp"
#include "csirate/pilot_mmse.hpp"
#include "csirate/spectrum.hpp"

#include <cstdint>
#include <vector>

namespace csirate
{
    struct McConfig
    {
        std::size_t n_samples = 1000000;
        std::uint64_t seed = 0;
        double tolerance_rel = 0.02;
        int jobs = 1; // worker threads; results do not depend on it

        void validate() const; // throws ConfigError
    };

    // Samples are drawn in fixed chunks of this size, chunk c seeded with
    // derive_seed(seed, {stream::monte_carlo, c}), and reduced in chunk order.
    inline constexpr std::size_t kMcChunk = 65536;

    struct McEstimate
    {
        double mean = 0.0;      // empirical MSE
        double std_error = 0.0; // standard error of the mean
        double expected = 0.0;  // analytic value
        std::size_t samples = 0;

        double deviation() const { return mean - expected; }

        // |mean - expected| <= max(3 SE, tolerance_rel |expected|).
        bool agrees(double tolerance_rel) const;
    };

    struct TestChannelMc
    {
        std::vector<McEstimate> per_mode;
        McEstimate total;
    };

    // Draws z ~ CN(0, λ), q ~ CN(0, d) per active mode and reconstructs
    // z_hat = λ_dec / (λ_dec + d) (z + q); inactive modes reconstruct to zero.
    TestChannelMc simulate_test_channel(const SpectrumPair &spectrum, const Allocation &alloc, const McConfig &cfg);

    // Draws h ~ CN(0, C_h), y = X h + n with n ~ CN(0, I), and measures ||h - W y||^2 for
    // the MMSE filter W. The expected value is D_mmse of mmse_posterior.
    McEstimate simulate_pilot_chain(const ChannelCovariance &prior, const CMatrix &pilots, const McConfig &cfg);
    McEstimate simulate_pilot_chain(const ChannelCovariance &prior, const PilotConfig &pilots, int antennas,
                                    const McConfig &cfg);

} // namespace csirate

#endif

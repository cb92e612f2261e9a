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

#ifndef csirate_rng_H
#define csirate_rng_H

#include "csirate/common.hpp"

#include <cstdint>
#include <initializer_list>
#include <random>

namespace csirate
{
    // Reproducible random source.
    //
    // Engine: std::mt19937_64, whose output sequence is fixed by the C++ standard.
    // Uniforms take the top 53 bits of one engine word: u = (w >> 11) * 2^-53.
    // Normals use the Box-Muller transform on two uniforms and return both variates
    // in order (cos branch first). Complex CN(0, v) draws consume two normals,
    // real part first, each scaled by sqrt(v/2).
    //
    // Stream splitting: a child stream is seeded with derive_seed(parent, tags...),
    // which folds each tag into the parent with the SplitMix64 finalizer. Streams are
    // never shared between threads; parallel work derives one stream per work item.
    class Rng
    {
    public:
        explicit Rng(std::uint64_t seed) : engine_(seed) {}

        double uniform();
        double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
        double normal();
        cdouble complex_normal(double variance = 1.0);

    private:
        std::mt19937_64 engine_;
        double spare_ = 0.0;
        bool has_spare_ = false;
    };

    std::uint64_t splitmix64(std::uint64_t x);
    std::uint64_t derive_seed(std::uint64_t parent, std::initializer_list<std::uint64_t> tags);

    // Fixed stream tags used by the experiment pipeline.
    namespace stream
    {
        inline constexpr std::uint64_t multipath = 0x6d70;
        inline constexpr std::uint64_t pilots = 0x706c;
        inline constexpr std::uint64_t mismatch = 0x6d6d;
        inline constexpr std::uint64_t monte_carlo = 0x6d63;
    } // namespace stream

} // namespace csirate

#endif

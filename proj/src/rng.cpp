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

#include "csirate/rng.hpp"

#include <cmath>
#include <numbers>

namespace csirate
{
    double Rng::uniform()
    {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double Rng::normal()
    {
        if (has_spare_)
        {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0)
            u1 = uniform();
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

    cdouble Rng::complex_normal(double variance)
    {
        const double scale = std::sqrt(0.5 * variance);
        const double re = normal();
        const double im = normal();
        return {scale * re, scale * im};
    }

    std::uint64_t splitmix64(std::uint64_t x)
    {
        x += 0x9e3779b97f4a7c15ULL;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

    std::uint64_t derive_seed(std::uint64_t parent, std::initializer_list<std::uint64_t> tags)
    {
        std::uint64_t h = splitmix64(parent);
        for (std::uint64_t t : tags)
            h = splitmix64(h ^ splitmix64(t + 0x632be59bd9b4e019ULL));
        return h;
    }

} // namespace csirate

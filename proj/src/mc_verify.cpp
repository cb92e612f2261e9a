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

#include "csirate/mc_verify.hpp"
#include "csirate/parallel.hpp"
#include "csirate/rd_eval.hpp"
#include "csirate/rng.hpp"

#include <algorithm>
#include <cmath>

namespace csirate
{
    void McConfig::validate() const
    {
        if (n_samples < 1)
            throw ConfigError("Monte Carlo needs at least one sample");
        if (!(tolerance_rel > 0.0))
            throw ConfigError("Monte Carlo tolerance must be positive");
    }

    bool McEstimate::agrees(double tolerance_rel) const
    {
        return std::abs(deviation()) <= std::max(3.0 * std_error, tolerance_rel * std::abs(expected));
    }

    namespace
    {
        // Running sums over one chunk for `width` statistics.
        struct Moments
        {
            std::vector<double> sum;
            std::vector<double> sum_sq;

            explicit Moments(std::size_t width = 0) : sum(width, 0.0), sum_sq(width, 0.0) {}

            void add(std::size_t k, double x)
            {
                sum[k] += x;
                sum_sq[k] += x * x;
            }

            void merge(const Moments &o)
            {
                for (std::size_t k = 0; k < sum.size(); ++k)
                {
                    sum[k] += o.sum[k];
                    sum_sq[k] += o.sum_sq[k];
                }
            }
        };

        McEstimate finalize(const Moments &m, std::size_t k, std::size_t n, double expected)
        {
            McEstimate e;
            e.samples = n;
            e.expected = expected;
            e.mean = m.sum[k] / static_cast<double>(n);
            if (n > 1)
            {
                const double var = std::max(0.0, (m.sum_sq[k] - n * e.mean * e.mean) / static_cast<double>(n - 1));
                e.std_error = std::sqrt(var / static_cast<double>(n));
            }
            return e;
        }

        // Runs chunk(c, rng, moments) over fixed-size chunks and reduces in chunk order.
        template <class Chunk>
        Moments run_chunks(const McConfig &cfg, std::size_t width, Chunk chunk)
        {
            cfg.validate();
            const std::size_t chunks = (cfg.n_samples + kMcChunk - 1) / kMcChunk;
            std::vector<Moments> parts(chunks, Moments(width));
            parallel_for(chunks, cfg.jobs, [&](std::size_t c) {
                const std::size_t begin = c * kMcChunk;
                const std::size_t count = std::min(kMcChunk, cfg.n_samples - begin);
                Rng rng(derive_seed(cfg.seed, {stream::monte_carlo, c}));
                chunk(count, rng, parts[c]);
            });
            Moments total(width);
            for (const Moments &p : parts)
                total.merge(p);
            return total;
        }
    } // namespace

    TestChannelMc simulate_test_channel(const SpectrumPair &spectrum, const Allocation &alloc, const McConfig &cfg)
    {
        const std::size_t modes = alloc.d.size();
        if (modes != spectrum.n_active)
            throw DimensionError("allocation and spectrum disagree on the number of active modes");

        // Slot `modes` holds the per-sample total.
        const Moments m = run_chunks(cfg, modes + 1, [&](std::size_t count, Rng &rng, Moments &acc) {
            for (std::size_t s = 0; s < count; ++s)
            {
                double total = 0.0;
                for (std::size_t i = 0; i < modes; ++i)
                {
                    const cdouble z = rng.complex_normal(spectrum.lambda_true[i]);
                    cdouble z_hat = 0.0;
                    if (is_active(alloc.d[i]))
                    {
                        const cdouble q = rng.complex_normal(alloc.d[i]);
                        const double gain = spectrum.lambda_dec[i] / (spectrum.lambda_dec[i] + alloc.d[i]);
                        z_hat = gain * (z + q);
                    }
                    const double err = std::norm(z - z_hat);
                    acc.add(i, err);
                    total += err;
                }
                acc.add(modes, total);
            }
        });

        TestChannelMc out;
        double expected_total = 0.0;
        for (std::size_t i = 0; i < modes; ++i)
        {
            const double e = mode_distortion(spectrum.lambda_true[i], spectrum.lambda_dec[i], alloc.d[i]);
            out.per_mode.push_back(finalize(m, i, cfg.n_samples, e));
            expected_total += e;
        }
        out.total = finalize(m, modes, cfg.n_samples, expected_total);
        return out;
    }

    McEstimate simulate_pilot_chain(const ChannelCovariance &prior, const CMatrix &pilots, const McConfig &cfg)
    {
        const PosteriorModel post = mmse_posterior(prior, pilots);
        const CMatrix root = eigen_square_root(prior.matrix);
        const CMatrix filter = mmse_filter(prior, pilots);
        const Eigen::Index rank = root.cols();
        const Eigen::Index rows = pilots.rows();

        const Moments m = run_chunks(cfg, 1, [&](std::size_t count, Rng &rng, Moments &acc) {
            CVector z(rank);
            CVector noise(rows);
            for (std::size_t s = 0; s < count; ++s)
            {
                for (Eigen::Index k = 0; k < rank; ++k)
                    z(k) = rng.complex_normal(1.0);
                for (Eigen::Index k = 0; k < rows; ++k)
                    noise(k) = rng.complex_normal(1.0);
                const CVector h = root * z;
                double err = h.squaredNorm();
                if (rows > 0)
                {
                    const CVector y = pilots * h + noise;
                    err = (h - filter * y).squaredNorm();
                }
                acc.add(0, err);
            }
        });
        return finalize(m, 0, cfg.n_samples, post.d_mmse);
    }

    McEstimate simulate_pilot_chain(const ChannelCovariance &prior, const PilotConfig &pilots, int antennas,
                                    const McConfig &cfg)
    {
        if (antennas < 1 || prior.dim() % antennas != 0)
            throw DimensionError("channel dimension is not a multiple of the antenna count");
        const int subcarriers = static_cast<int>(prior.dim() / antennas);
        return simulate_pilot_chain(prior, build_pilot_matrix(pilots, antennas, subcarriers), cfg);
    }

} // namespace csirate

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

#include "csirate/pilot_mmse.hpp"
#include "csirate/rng.hpp"

#include <cmath>
#include <set>

namespace csirate
{
    void PilotConfig::validate(int subcarriers) const
    {
        if (pilot_symbols < 0)
            throw ConfigError("pilot symbol count must be non-negative");
        if (!(snr_dl > 0.0))
            throw ConfigError("downlink SNR must be positive");
        if (probed_count() > subcarriers)
            throw ConfigError("more probed subcarriers than subcarriers");
        std::set<int> seen;
        for (int idx : probed_subcarriers)
        {
            if (idx < 1 || idx > subcarriers)
                throw ConfigError("probed subcarrier " + std::to_string(idx) + " outside [1, " +
                                  std::to_string(subcarriers) + "]");
            if (!seen.insert(idx).second)
                throw ConfigError("probed subcarrier " + std::to_string(idx) + " listed twice");
        }
    }

    PilotConfig comb_pilot_config(int subcarriers, int pilot_symbols, int probed_count, double snr_dl,
                                  std::uint64_t seed)
    {
        if (probed_count < 0 || probed_count > subcarriers)
            throw ConfigError("probed subcarrier count must lie in [0, N]");
        PilotConfig cfg;
        cfg.pilot_symbols = pilot_symbols;
        cfg.snr_dl = snr_dl;
        cfg.seed = seed;
        for (int k = 0; k < probed_count; ++k)
        {
            const double pos = static_cast<double>(k) * subcarriers / probed_count;
            cfg.probed_subcarriers.push_back(static_cast<int>(std::lround(pos)) % subcarriers + 1);
        }
        cfg.validate(subcarriers);
        return cfg;
    }

    CMatrix build_unit_pilot_matrix(const PilotConfig &config, int antennas, int subcarriers)
    {
        if (antennas < 1 || subcarriers < 1)
            throw ConfigError("antenna and subcarrier counts must be at least 1");
        config.validate(subcarriers);

        const int rows = config.training_length();
        CMatrix X = CMatrix::Zero(rows, static_cast<Eigen::Index>(antennas) * subcarriers);
        Rng rng(config.seed);
        for (int k = 0; k < config.probed_count(); ++k)
        {
            const Eigen::Index col0 = static_cast<Eigen::Index>(config.probed_subcarriers[k] - 1) * antennas;
            for (int t = 0; t < config.pilot_symbols; ++t)
            {
                const Eigen::Index row = t + static_cast<Eigen::Index>(config.pilot_symbols) * k;
                for (int m = 0; m < antennas; ++m)
                    X(row, col0 + m) = rng.complex_normal(1.0);
            }
        }
        return X;
    }

    CMatrix build_pilot_matrix(const PilotConfig &config, int antennas, int subcarriers)
    {
        CMatrix X = build_unit_pilot_matrix(config, antennas, subcarriers);
        X *= std::sqrt(config.snr_dl / antennas);
        return X;
    }

    namespace
    {
        void check_shapes(const ChannelCovariance &prior, const CMatrix &pilots)
        {
            if (prior.matrix.rows() != prior.matrix.cols())
                throw DimensionError("prior covariance must be square");
            if (pilots.rows() > 0 && pilots.cols() != prior.dim())
                throw DimensionError("pilot matrix has " + std::to_string(pilots.cols()) +
                                     " columns, channel dimension is " + std::to_string(prior.dim()));
        }

        // Cholesky factor of X C X^H + I together with A = X C.
        struct GramSystem
        {
            CMatrix xc;
            Eigen::LLT<CMatrix> llt;
        };

        GramSystem factorize(const ChannelCovariance &prior, const CMatrix &pilots)
        {
            GramSystem g;
            g.xc = pilots * prior.matrix;
            CMatrix gram = g.xc * pilots.adjoint();
            gram = (0.5 * (gram + gram.adjoint())).eval();
            gram.diagonal().array() += 1.0;
            g.llt.compute(gram);
            if (g.llt.info() != Eigen::Success)
                throw std::runtime_error("pilot Gram matrix is not positive definite");
            return g;
        }
    } // namespace

    PosteriorModel mmse_posterior(const ChannelCovariance &prior, const CMatrix &pilots)
    {
        check_shapes(prior, pilots);
        const Eigen::Index n = prior.dim();

        PosteriorModel post;
        post.prior_trace = prior.trace();
        if (pilots.rows() == 0)
        {
            post.c_tilde = CMatrix::Zero(n, n);
            post.factor = CMatrix::Zero(n, 0);
            post.d_mmse = post.prior_trace;
            return post;
        }

        const GramSystem g = factorize(prior, pilots);
        // factor = (X C)^H L^{-H}, so factor factor^H = C X^H (L L^H)^{-1} X C.
        const CMatrix whitened = g.llt.matrixL().solve(g.xc); // L^{-1} X C
        post.factor = whitened.adjoint();
        post.c_tilde = post.factor * post.factor.adjoint();
        post.c_tilde = (0.5 * (post.c_tilde + post.c_tilde.adjoint())).eval();
        post.d_mmse = (prior.matrix - post.c_tilde).trace().real();
        return post;
    }

    CMatrix mmse_filter(const ChannelCovariance &prior, const CMatrix &pilots)
    {
        check_shapes(prior, pilots);
        if (pilots.rows() == 0)
            return CMatrix::Zero(prior.dim(), 0);
        const GramSystem g = factorize(prior, pilots);
        // W = (X C)^H G^{-1} = (G^{-1} X C)^H since G is Hermitian.
        return g.llt.solve(g.xc).adjoint();
    }

    CVector mmse_estimate(const ChannelCovariance &prior, const CMatrix &pilots, const CVector &observation)
    {
        if (observation.size() != pilots.rows())
            throw DimensionError("observation length " + std::to_string(observation.size()) +
                                 " does not match training length " + std::to_string(pilots.rows()));
        if (pilots.rows() == 0)
        {
            check_shapes(prior, pilots);
            return CVector::Zero(prior.dim());
        }
        return mmse_filter(prior, pilots) * observation;
    }

    double TrainingGram::d_mmse(double snr_dl) const
    {
        if (gram.rows() == 0)
            return prior_trace;
        const double s = snr_dl / antennas;
        CMatrix sys = s * gram;
        sys.diagonal().array() += 1.0;
        Eigen::LLT<CMatrix> llt(sys);
        const CMatrix solved = llt.solve(cross);
        return prior_trace - s * solved.trace().real();
    }

    TrainingGram training_gram(const ChannelCovariance &prior, const CMatrix &unit_pilots, int antennas)
    {
        check_shapes(prior, unit_pilots);
        TrainingGram tg;
        tg.prior_trace = prior.trace();
        tg.antennas = antennas;
        const CMatrix xc = unit_pilots * prior.matrix;
        tg.gram = xc * unit_pilots.adjoint();
        tg.gram = (0.5 * (tg.gram + tg.gram.adjoint())).eval();
        tg.cross = xc * xc.adjoint();
        return tg;
    }

} // namespace csirate

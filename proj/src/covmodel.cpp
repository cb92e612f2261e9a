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

#include "csirate/covmodel.hpp"
#include "csirate/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace csirate
{
    double MultipathParams::effective_delay_spread() const
    {
        return delay_spread > 0.0 ? delay_spread : default_delay_spread(subcarriers);
    }

    void MultipathParams::validate() const
    {
        if (antennas < 1 || subcarriers < 1)
            throw ConfigError("antenna and subcarrier counts must be at least 1");
        if (gains.empty())
            throw ConfigError("at least one path is required");
        if (angles_deg.size() != gains.size() || delays.size() != gains.size())
            throw ConfigError("gains, angles and delays must have one entry per path");
        if (delay_spread < 0.0)
            throw ConfigError("delay spread must be non-negative");

        double sum = 0.0;
        for (double g : gains)
        {
            if (!(g > 0.0))
                throw ConfigError("path gains must be positive");
            sum += g;
        }
        if (std::abs(sum - 1.0) > 1e-12)
            throw ConfigError("path gains must sum to 1");
        for (double a : angles_deg)
            if (!(a >= -60.0 && a <= 60.0))
                throw ConfigError("path angles must lie in [-60, 60] degrees");
        for (double t : delays)
            if (!(t >= 0.0 && t <= 1.0))
                throw ConfigError("normalized delays must lie in [0, 1]");
    }

    CVector steering_vector(double theta_deg, int antennas)
    {
        if (antennas < 1)
            throw ConfigError("antenna count must be at least 1");
        const double phase_step = -std::numbers::pi * std::sin(theta_deg * std::numbers::pi / 180.0);
        CVector a(antennas);
        for (int m = 0; m < antennas; ++m)
            a(m) = std::polar(1.0, phase_step * m);
        return a;
    }

    CVector delay_vector(double tau, int subcarriers, double delay_spread)
    {
        if (subcarriers < 1)
            throw ConfigError("subcarrier count must be at least 1");
        const double phase_step = -2.0 * std::numbers::pi * tau * delay_spread;
        CVector b(subcarriers);
        for (int n = 0; n < subcarriers; ++n)
            b(n) = std::polar(1.0, phase_step * n);
        return b;
    }

    MultipathParams sample_multipath_params(int antennas, int subcarriers, int paths, std::uint64_t seed,
                                            double delay_spread)
    {
        if (paths < 1)
            throw ConfigError("path count must be at least 1");

        Rng rng(seed);
        MultipathParams p;
        p.antennas = antennas;
        p.subcarriers = subcarriers;
        p.delay_spread = delay_spread;
        p.gains.resize(paths);
        p.angles_deg.resize(paths);
        p.delays.resize(paths);

        for (double &g : p.gains)
            g = rng.uniform(0.4, 0.8);
        for (double &a : p.angles_deg)
            a = rng.uniform(-60.0, 60.0);
        for (double &t : p.delays)
            t = rng.uniform();

        const double sum = std::accumulate(p.gains.begin(), p.gains.end(), 0.0);
        for (double &g : p.gains)
            g /= sum;
        if (paths == 1)
            p.gains[0] = 1.0;

        p.validate();
        return p;
    }

    CMatrix multipath_factor(const MultipathParams &params)
    {
        params.validate();
        const int M = params.antennas;
        const int N = params.subcarriers;
        const double W = params.effective_delay_spread();

        CMatrix U(params.dim(), params.paths());
        for (int l = 0; l < params.paths(); ++l)
        {
            const CVector a = steering_vector(params.angles_deg[l], M);
            const CVector b = delay_vector(params.delays[l], N, W);
            const double amp = std::sqrt(params.gains[l]);
            for (int n = 0; n < N; ++n)
                U.col(l).segment(n * M, M) = (amp * b(n)) * a;
        }
        return U;
    }

    ChannelCovariance synth_covariance(const MultipathParams &params)
    {
        const CMatrix U = multipath_factor(params);
        ChannelCovariance C;
        C.matrix = U * U.adjoint();
        // Exact Hermitian symmetry; the product is Hermitian only up to rounding.
        C.matrix = (0.5 * (C.matrix + C.matrix.adjoint())).eval();
        return C;
    }

    CovarianceReport validate_covariance(const CMatrix &matrix)
    {
        if (matrix.rows() != matrix.cols())
            throw DimensionError("covariance must be square, got " + std::to_string(matrix.rows()) + "x" +
                                 std::to_string(matrix.cols()));
        CovarianceReport rep;
        if (matrix.size() == 0)
            return rep;

        rep.max_entry = matrix.cwiseAbs().maxCoeff();
        rep.hermitian_deviation = (matrix - matrix.adjoint()).cwiseAbs().maxCoeff();
        rep.trace = matrix.trace().real();
        rep.hermitian = rep.hermitian_deviation <= 1e-10 * rep.max_entry;

        const CMatrix sym = 0.5 * (matrix + matrix.adjoint());
        Eigen::SelfAdjointEigenSolver<CMatrix> es(sym, Eigen::EigenvaluesOnly);
        rep.min_eigenvalue = es.eigenvalues().minCoeff();
        const double floor = -1e-8 * std::abs(rep.trace) / static_cast<double>(matrix.rows());
        rep.psd = rep.min_eigenvalue >= floor;
        rep.positive_trace = rep.trace > 0.0;
        return rep;
    }

} // namespace csirate

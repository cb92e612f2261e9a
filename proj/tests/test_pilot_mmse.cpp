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
#include "csirate/pilot_mmse.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <set>

using namespace csirate;

namespace
{
    ChannelCovariance scaled_identity(int n, double c)
    {
        ChannelCovariance cov;
        cov.matrix = c * CMatrix::Identity(n, n);
        return cov;
    }

    double min_eigenvalue(const CMatrix &m)
    {
        return Eigen::SelfAdjointEigenSolver<CMatrix>(0.5 * (m + m.adjoint()), Eigen::EigenvaluesOnly)
            .eigenvalues()
            .minCoeff();
    }
}

TEST_CASE("comb layout spreads the probes evenly")
{
    const PilotConfig cfg = comb_pilot_config(32, 1, 8, 10.0, 1);
    CHECK(cfg.probed_subcarriers == std::vector<int>{1, 5, 9, 13, 17, 21, 25, 29});
    CHECK(cfg.training_length() == 8);
    CHECK_NOTHROW(cfg.validate(32));

    PilotConfig bad = cfg;
    bad.probed_subcarriers[0] = 33;
    CHECK_THROWS_AS(bad.validate(32), ConfigError);
    bad = cfg;
    bad.probed_subcarriers[1] = 1;
    CHECK_THROWS_AS(bad.validate(32), ConfigError);
    bad = cfg;
    bad.snr_dl = 0.0;
    CHECK_THROWS_AS(bad.validate(32), ConfigError);
}

TEST_CASE("pilot matrix shape and block structure")
{
    const int m = 4, n = 32;
    CHECK(build_pilot_matrix(comb_pilot_config(n, 0, 8, 10.0, 1), m, n).rows() == 0);
    CHECK(build_pilot_matrix(comb_pilot_config(n, 2, 0, 10.0, 1), m, n).rows() == 0);

    const PilotConfig cfg = comb_pilot_config(n, 2, 8, 10.0, 3);
    const CMatrix x = build_pilot_matrix(cfg, m, n);
    REQUIRE(x.rows() == 16);
    REQUIRE(x.cols() == m * n);
    int nonzero_cols = 0;
    for (Eigen::Index c = 0; c < x.cols(); ++c)
        if (x.col(c).cwiseAbs().maxCoeff() > 0.0)
            ++nonzero_cols;
    CHECK(nonzero_cols == 8 * m);

    // Row t + T_p k only touches the antenna block of the k-th probed subcarrier.
    for (int k = 0; k < 8; ++k)
        for (int t = 0; t < 2; ++t)
        {
            const int row = t + 2 * k;
            const int block = cfg.probed_subcarriers[k] - 1;
            for (int col = 0; col < m * n; ++col)
            {
                const bool inside = col / m == block;
                if (!inside)
                    CHECK(x(row, col) == cdouble(0.0, 0.0));
                else
                    CHECK(std::abs(x(row, col)) > 0.0);
            }
        }

    const CMatrix unit = build_unit_pilot_matrix(cfg, m, n);
    CHECK((x - std::sqrt(10.0 / m) * unit).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((build_pilot_matrix(cfg, m, n) - x).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("pilot entries have variance snr/M")
{
    const int m = 8;
    const double snr = 5.0;
    double power = 0.0;
    std::size_t count = 0;
    for (std::uint64_t seed = 0; count < 100000; ++seed)
    {
        const PilotConfig cfg = comb_pilot_config(4, 4, 4, snr, seed);
        const CMatrix x = build_pilot_matrix(cfg, m, 4);
        for (Eigen::Index r = 0; r < x.rows(); ++r)
        {
            const int block = cfg.probed_subcarriers[r / 4] - 1;
            power += x.row(r).segment(block * m, m).squaredNorm();
            count += m;
        }
    }
    CHECK(power / count == Catch::Approx(snr / m).epsilon(0.03));
}

TEST_CASE("posterior without observations keeps the prior as error")
{
    const ChannelCovariance prior = synth_covariance(sample_multipath_params(4, 4, 3, 9));
    const PosteriorModel post = mmse_posterior(prior, CMatrix(0, 16));
    CHECK(post.c_tilde.cwiseAbs().maxCoeff() == 0.0);
    CHECK(post.d_mmse == Catch::Approx(prior.trace()));
}

TEST_CASE("scalar closed form for C = cI, X = I")
{
    for (double c : {0.3, 1.0, 7.5})
    {
        const int n = 5;
        const PosteriorModel post = mmse_posterior(scaled_identity(n, c), CMatrix::Identity(n, n));
        CHECK((post.c_tilde - (c * c / (c + 1.0)) * CMatrix::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-14);
        CHECK(post.d_mmse == Catch::Approx(n * c / (c + 1.0)).epsilon(1e-12));
    }
}

TEST_CASE("error vanishes monotonically with training power")
{
    const ChannelCovariance prior = synth_covariance(sample_multipath_params(3, 3, 4, 2));
    const CMatrix x0 = build_unit_pilot_matrix(comb_pilot_config(3, 3, 3, 1.0, 4), 3, 3);
    double prev = prior.trace();
    for (double s : {0.1, 1.0, 10.0, 100.0, 1e4, 1e6})
    {
        const double d = mmse_posterior(prior, std::sqrt(s) * x0).d_mmse;
        CHECK(d < prev);
        prev = d;
    }
    const PosteriorModel full = mmse_posterior(prior, 1e4 * CMatrix::Identity(9, 9));
    CHECK(full.d_mmse < 1e-6 * prior.trace());
}

TEST_CASE("posterior invariants on the paper-sized channel")
{
    const ChannelCovariance prior = synth_covariance(sample_multipath_params(32, 32, 6, 1));
    const CMatrix x = build_pilot_matrix(comb_pilot_config(32, 1, 8, 10.0, 1), 32, 32);
    const PosteriorModel post = mmse_posterior(prior, x);

    // Independent evaluation of C X^H (X C X^H + I)^{-1} X C through a dense inverse.
    const CMatrix xc = x * prior.matrix;
    const CMatrix g = xc * x.adjoint() + CMatrix::Identity(8, 8);
    const CMatrix ref = xc.adjoint() * g.inverse() * xc;
    CHECK((post.c_tilde - ref).cwiseAbs().maxCoeff() < 1e-10 * ref.cwiseAbs().maxCoeff());
    CHECK((post.factor * post.factor.adjoint() - post.c_tilde).cwiseAbs().maxCoeff() <
          1e-10 * ref.cwiseAbs().maxCoeff());

    const double d_ref = prior.trace() - ref.trace().real();
    CHECK(post.d_mmse == Catch::Approx(d_ref).epsilon(1e-8));
    CHECK(post.d_mmse == Catch::Approx(prior.trace() - post.c_tilde.trace().real()).epsilon(1e-8));
    CHECK(post.estimate_trace() <= prior.trace());

    CHECK(validate_covariance(post.c_tilde).passed());
    CHECK(min_eigenvalue(prior.matrix - post.c_tilde) >= -1e-8 * prior.trace() / 1024.0);

    const Eigen::VectorXd eig =
        Eigen::SelfAdjointEigenSolver<CMatrix>(post.c_tilde, Eigen::EigenvaluesOnly).eigenvalues();
    CHECK((eig.array() > 1e-9 * prior.trace()).count() <= 6);
}

TEST_CASE("appending pilot rows never increases the error")
{
    const ChannelCovariance prior = synth_covariance(sample_multipath_params(4, 8, 5, 17));
    const CMatrix x = build_pilot_matrix(comb_pilot_config(8, 3, 8, 3.0, 8), 4, 8);
    double prev = prior.trace();
    for (Eigen::Index rows = 1; rows <= x.rows(); ++rows)
    {
        const double d = mmse_posterior(prior, x.topRows(rows)).d_mmse;
        CHECK(d <= prev * (1.0 + 1e-12));
        prev = d;
    }
}

TEST_CASE("MMSE estimate is the linear filter applied to y")
{
    const int n = 3;
    const ChannelCovariance eye = scaled_identity(n, 1.0);
    CVector y(n);
    y << cdouble(1.0, 2.0), cdouble(-0.5, 0.0), cdouble(0.0, 3.0);
    CHECK((mmse_estimate(eye, CMatrix::Identity(n, n), y) - 0.5 * y).cwiseAbs().maxCoeff() < 1e-15);
    CHECK(mmse_estimate(eye, CMatrix::Identity(n, n), CVector::Zero(n)).cwiseAbs().maxCoeff() == 0.0);

    const ChannelCovariance prior = synth_covariance(sample_multipath_params(2, 4, 2, 4));
    const CMatrix x = build_pilot_matrix(comb_pilot_config(4, 1, 2, 2.0, 5), 2, 4);
    const CMatrix w = mmse_filter(prior, x);
    CVector obs(2);
    obs << cdouble(0.3, -0.1), cdouble(1.0, 0.5);
    CHECK((mmse_estimate(prior, x, obs) - w * obs).cwiseAbs().maxCoeff() < 1e-14);
    CHECK_THROWS_AS(mmse_estimate(prior, x, CVector::Zero(3)), DimensionError);
    CHECK_THROWS_AS(mmse_posterior(prior, CMatrix::Zero(2, 5)), DimensionError);
}

TEST_CASE("training Gram re-evaluates the error at any SNR")
{
    const int m = 4;
    const ChannelCovariance prior = synth_covariance(sample_multipath_params(m, 8, 3, 31));
    const PilotConfig cfg = comb_pilot_config(8, 1, 4, 1.0, 6);
    const CMatrix unit = build_unit_pilot_matrix(cfg, m, 8);
    const TrainingGram gram = training_gram(prior, unit, m);
    for (double snr : {0.01, 1.0, 10.0, 1000.0})
    {
        const double direct = mmse_posterior(prior, std::sqrt(snr / m) * unit).d_mmse;
        CHECK(gram.d_mmse(snr) == Catch::Approx(direct).epsilon(1e-10));
    }
}

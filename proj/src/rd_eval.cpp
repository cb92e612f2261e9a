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

#include "csirate/rd_eval.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace csirate
{
    double mode_distortion(double lambda, double lambda_dec, double d)
    {
        if (!(d > 0.0))
            throw std::domain_error("test-channel noise variance must be positive");
        if (!is_active(d))
            return lambda;
        // u = d/(b+d), w = b/(b+d): e = λ u^2 + b u w, free of overflow for huge d.
        const double u = d / (lambda_dec + d);
        const double w = lambda_dec / (lambda_dec + d);
        return lambda * u * u + lambda_dec * u * w;
    }

    double mode_distortion_derivative(double lambda, double lambda_dec, double d)
    {
        if (!(d > 0.0))
            throw std::domain_error("test-channel noise variance must be positive");
        if (!is_active(d))
            return 0.0;
        const double s = lambda_dec + d;
        const double w = lambda_dec / s;
        return w * (w * w + (2.0 * lambda - lambda_dec) * (d / s) / s);
    }

    namespace
    {
        void check_square_pair(const CMatrix &a, const CMatrix &b, const char *what)
        {
            if (a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows())
                throw DimensionError(std::string(what) + ": operands must be square and of equal size");
            if (!a.allFinite() || !b.allFinite())
                throw std::domain_error(std::string(what) + ": non-finite entry (inactive modes need a finite surrogate)");
        }

        CMatrix hermitian_part(const CMatrix &m) { return 0.5 * (m + m.adjoint()); }
    } // namespace

    double rate_matrix(const CMatrix &c_u, const CMatrix &c_q)
    {
        check_square_pair(c_u, c_q, "rate_matrix");
        if (c_u.rows() == 0)
            return 0.0;
        Eigen::LLT<CMatrix> llt(hermitian_part(c_q));
        if (llt.info() != Eigen::Success)
            throw std::domain_error("rate_matrix: C_q is not positive definite");

        // S = L^{-1} C_u L^{-H}; det(I + C_u C_q^{-1}) = det(I + S).
        const CMatrix half = llt.matrixL().solve(c_u);
        const CMatrix s = hermitian_part(llt.matrixL().solve(half.adjoint()));
        const Eigen::VectorXd eig = Eigen::SelfAdjointEigenSolver<CMatrix>(s, Eigen::EigenvaluesOnly).eigenvalues();
        double bits = 0.0;
        for (Eigen::Index k = 0; k < eig.size(); ++k)
            bits += std::log1p(std::max(eig(k), 0.0));
        return bits / kLn2;
    }

    double distortion_matrix(const CMatrix &c_u, const CMatrix &c_ub, const CMatrix &c_q)
    {
        check_square_pair(c_u, c_q, "distortion_matrix");
        check_square_pair(c_u, c_ub, "distortion_matrix");
        if (c_u.rows() == 0)
            return 0.0;
        Eigen::LLT<CMatrix> llt(hermitian_part(c_ub + c_q));
        if (llt.info() != Eigen::Success)
            throw std::domain_error("distortion_matrix: C_ub + C_q is not positive definite");

        // K^H = (C_ub + C_q)^{-1} C_ub since both factors are Hermitian.
        const CMatrix k = llt.solve(c_ub).adjoint();
        const CMatrix kc = k * c_u;
        const cdouble total =
            c_u.trace() - kc.trace() - kc.adjoint().trace() + (k * (c_u + c_q) * k.adjoint()).trace();
        return total.real();
    }

    DistortionReport evaluate_allocation(const SpectrumPair &spectrum, const Allocation &alloc, double estimate_trace,
                                         double d_mmse, double prior_trace)
    {
        if (alloc.d.size() != spectrum.n_active)
            throw DimensionError("allocation has " + std::to_string(alloc.d.size()) + " modes, spectrum has " +
                                 std::to_string(spectrum.n_active) + " active modes");

        DistortionReport rep;
        rep.per_mode_e.resize(alloc.d.size());
        rep.rate_bits = 0.0;
        for (std::size_t i = 0; i < alloc.d.size(); ++i)
        {
            rep.per_mode_e[i] = mode_distortion(spectrum.lambda_true[i], spectrum.lambda_dec[i], alloc.d[i]);
            rep.d_quant += rep.per_mode_e[i];
            rep.rate_bits += mode_rate(spectrum.lambda_true[i], alloc.d[i]);
        }
        rep.design_rate_bits = alloc.design_rate;
        rep.estimate_trace = estimate_trace;
        rep.prior_trace = prior_trace;
        rep.d_mmse = d_mmse;
        rep.d_e2e = d_mmse + rep.d_quant;
        rep.nmse_db = 10.0 * std::log10(rep.d_quant / estimate_trace);
        rep.nmse_e2e_db = 10.0 * std::log10(rep.d_e2e / prior_trace);
        return rep;
    }

    DistortionReport evaluate_allocation(const SpectrumPair &spectrum, const Allocation &alloc,
                                         const PosteriorModel &posterior, double prior_trace)
    {
        return evaluate_allocation(spectrum, alloc, posterior.estimate_trace(), posterior.d_mmse, prior_trace);
    }

    DistortionReport evaluate_allocation(const SpectrumPair &spectrum, const Allocation &alloc)
    {
        double trace = 0.0;
        for (double v : spectrum.lambda_true)
            trace += v;
        return evaluate_allocation(spectrum, alloc, trace, 0.0, trace);
    }

} // namespace csirate

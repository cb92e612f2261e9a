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

#include "csirate/spectrum.hpp"
#include "csirate/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace csirate
{
    namespace
    {
        // Reorders (values, columns) by descending value, ties kept in input order.
        Eigendecomposition sorted_descending(const Eigen::VectorXd &values, const CMatrix &vectors)
        {
            const auto n = static_cast<std::size_t>(values.size());
            std::vector<std::size_t> order(n);
            std::iota(order.begin(), order.end(), 0);
            std::stable_sort(order.begin(), order.end(),
                             [&](std::size_t a, std::size_t b) { return values(a) > values(b); });

            Eigendecomposition out;
            out.basis.resize(vectors.rows(), static_cast<Eigen::Index>(n));
            out.eigenvalues.resize(n);
            for (std::size_t k = 0; k < n; ++k)
            {
                out.basis.col(k) = vectors.col(order[k]);
                out.eigenvalues[k] = std::max(values(order[k]), 0.0);
            }
            return out;
        }
    } // namespace

    Eigendecomposition eigendecompose(const CMatrix &matrix)
    {
        if (matrix.rows() != matrix.cols())
            throw DimensionError("eigendecompose needs a square matrix");
        if (matrix.size() == 0)
            return {};
        const double scale = matrix.cwiseAbs().maxCoeff();
        const double deviation = (matrix - matrix.adjoint()).cwiseAbs().maxCoeff();
        if (deviation > 1e-10 * scale)
            throw std::invalid_argument("eigendecompose: matrix is not Hermitian (deviation " +
                                        std::to_string(deviation) + ")");

        // The solver reads the lower triangle only; symmetrize so both halves count.
        const CMatrix sym = 0.5 * (matrix + matrix.adjoint());
        Eigen::SelfAdjointEigenSolver<CMatrix> es(sym);
        if (es.info() != Eigen::Success)
            throw std::runtime_error("eigendecompose: Hermitian eigensolver did not converge");
        return sorted_descending(es.eigenvalues(), es.eigenvectors());
    }

    Eigendecomposition eigendecompose_factored(const CMatrix &factor)
    {
        if (factor.cols() == 0 || factor.rows() == 0)
            return {CMatrix::Zero(factor.rows(), 0), {}};

        Eigen::JacobiSVD<CMatrix> svd(factor, Eigen::ComputeThinU);
        const Eigen::VectorXd sv = svd.singularValues();
        const double cutoff = sv(0) * 1e-15 * static_cast<double>(std::max(factor.rows(), factor.cols()));
        Eigen::Index keep = 0;
        while (keep < sv.size() && sv(keep) > cutoff)
            ++keep;

        const Eigen::VectorXd values = sv.head(keep).array().square();
        return sorted_descending(values, svd.matrixU().leftCols(keep));
    }

    CMatrix psd_factor(const CMatrix &matrix, double rel_tol)
    {
        if (matrix.rows() != matrix.cols())
            throw DimensionError("psd_factor needs a square matrix");
        const Eigen::Index n = matrix.rows();
        Eigen::VectorXd residual = matrix.diagonal().real();
        const double total = residual.sum();
        CMatrix L(n, 0);
        if (n == 0 || total <= 0.0)
            return L;

        std::vector<CVector> cols;
        while (static_cast<Eigen::Index>(cols.size()) < n)
        {
            Eigen::Index pivot = 0;
            const double largest = residual.maxCoeff(&pivot);
            if (residual.cwiseMax(0.0).sum() <= rel_tol * total || largest <= 0.0)
                break;

            CVector c = matrix.col(pivot);
            for (const CVector &prev : cols)
                c -= prev * std::conj(prev(pivot));
            c /= std::sqrt(largest);
            residual -= c.cwiseAbs2();
            residual(pivot) = 0.0;
            cols.push_back(std::move(c));
        }

        L.resize(n, static_cast<Eigen::Index>(cols.size()));
        for (std::size_t k = 0; k < cols.size(); ++k)
            L.col(static_cast<Eigen::Index>(k)) = cols[k];
        return L;
    }

    CMatrix eigen_square_root(const CMatrix &matrix)
    {
        const Eigendecomposition eig = eigendecompose_factored(psd_factor(matrix));
        CMatrix root = eig.basis;
        for (std::size_t k = 0; k < eig.eigenvalues.size(); ++k)
            root.col(static_cast<Eigen::Index>(k)) *= std::sqrt(eig.eigenvalues[k]);
        return root;
    }

    SpectrumPair make_matched_pair(Eigendecomposition eig)
    {
        SpectrumPair pair;
        pair.basis = std::move(eig.basis);
        pair.lambda_true = std::move(eig.eigenvalues);
        pair.lambda_dec = pair.lambda_true;
        pair.n_active = pair.lambda_true.size();
        return pair;
    }

    std::vector<double> draw_mismatch_db(std::size_t count, const MismatchSpec &spec)
    {
        if (!(spec.sigma_delta_db >= 0.0))
            throw ConfigError("mismatch standard deviation must be non-negative");
        Rng rng(spec.seed);
        std::vector<double> delta(count);
        for (double &d : delta)
            d = spec.sigma_delta_db * rng.normal();
        return delta;
    }

    std::vector<double> apply_mismatch_db(std::span<const double> lambda, std::span<const double> delta_db)
    {
        if (lambda.size() != delta_db.size())
            throw DimensionError("one mismatch offset per eigenvalue is required");
        std::vector<double> out(lambda.size());
        for (std::size_t i = 0; i < lambda.size(); ++i)
            out[i] = delta_db[i] == 0.0 ? lambda[i] : lambda[i] * std::pow(10.0, delta_db[i] / 10.0);
        return out;
    }

    std::vector<double> inject_mismatch(std::span<const double> lambda, const MismatchSpec &spec)
    {
        const std::vector<double> delta = draw_mismatch_db(lambda.size(), spec);
        return apply_mismatch_db(lambda, delta);
    }

    SpectrumPair truncate_rank(SpectrumPair pair, double eps_rel)
    {
        if (!(eps_rel > 0.0 && eps_rel < 1.0))
            throw ConfigError("truncation tolerance must lie in (0, 1)");
        if (pair.lambda_dec.size() != pair.lambda_true.size())
            throw DimensionError("true and decoder spectra differ in length");

        const std::size_t limit = std::min(pair.n_active, pair.lambda_true.size());
        const double top = limit > 0 ? pair.lambda_true[0] : 0.0;
        std::size_t keep = 0;
        while (keep < limit && pair.lambda_true[keep] > eps_rel * top && pair.lambda_true[keep] > 0.0)
            ++keep;
        if (keep == 0)
            throw EmptySpectrumError("rank truncation dropped every mode");
        pair.n_active = keep;
        return pair;
    }

} // namespace csirate

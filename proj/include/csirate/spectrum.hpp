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

#ifndef csirate_spectrum_H
#define csirate_spectrum_H

#include "csirate/common.hpp"
#include "csirate/covmodel.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace csirate
{
    inline constexpr double kDefaultTruncation = 1e-10;

    struct Eigendecomposition
    {
        CMatrix basis;                   // orthonormal columns, one per eigenvalue
        std::vector<double> eigenvalues; // descending, clamped at 0
    };

    // Shared eigenbasis with true and decoder-side eigenvalues.
    //
    // Only the first n_active modes carry rate; the rest were dropped by truncate_rank
    // and contribute neither rate nor distortion. The basis may be thin (fewer columns
    // than rows) when the spectrum came from a low-rank factor.
    struct SpectrumPair
    {
        CMatrix basis;
        std::vector<double> lambda_true; // descending
        std::vector<double> lambda_dec;
        std::size_t n_active = 0;

        std::span<const double> active_true() const { return {lambda_true.data(), n_active}; }
        std::span<const double> active_dec() const { return {lambda_dec.data(), n_active}; }
    };

    struct MismatchSpec
    {
        double sigma_delta_db = 0.0;
        std::uint64_t seed = 0;
    };

    // Full Hermitian eigendecomposition. Throws DimensionError on non-square input and
    // std::invalid_argument when C deviates from Hermitian by more than 1e-10 max|C|.
    Eigendecomposition eigendecompose(const CMatrix &matrix);

    // Eigenpairs of B B^H from a thin SVD of B (n x k); returns at most k modes and drops
    // numerically zero singular values. Cost is O(n k^2).
    Eigendecomposition eigendecompose_factored(const CMatrix &factor);

    // Low-rank factor L (n x r) with L L^H = C up to rel_tol trace, by diagonally
    // pivoted Cholesky. Cost O(n r^2).
    CMatrix psd_factor(const CMatrix &matrix, double rel_tol = 1e-13);

    // F diag(sqrt λ): a square root whose columns are scaled eigenvectors.
    CMatrix eigen_square_root(const CMatrix &matrix);

    // Matched pair (lambda_dec = lambda_true) with every mode active.
    SpectrumPair make_matched_pair(Eigendecomposition eig);

    // δ_i = σ z_i with z_i i.i.d. N(0, 1) drawn from the seed, one per entry including
    // zero modes, so equal seeds give the same z for every σ.
    std::vector<double> draw_mismatch_db(std::size_t count, const MismatchSpec &spec);

    // λ_dec_i = λ_i 10^(δ_i / 10).
    std::vector<double> apply_mismatch_db(std::span<const double> lambda, std::span<const double> delta_db);

    std::vector<double> inject_mismatch(std::span<const double> lambda, const MismatchSpec &spec);

    // Keeps modes with λ_i > eps_rel λ_1. Throws EmptySpectrumError if none survive.
    SpectrumPair truncate_rank(SpectrumPair pair, double eps_rel = kDefaultTruncation);

} // namespace csirate

#endif

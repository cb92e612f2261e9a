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

#ifndef csirate_allocator_H
#define csirate_allocator_H

#include "csirate/common.hpp"
#include "csirate/spectrum.hpp"

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace csirate
{
    enum class Scheme
    {
        rwf,     // classical reverse water-filling on the true eigenvalues
        rrwf,    // mismatch-aware allocation from the per-mode cubic KKT condition
        asrwf,   // reverse water-filling designed on the decoder eigenvalues
        uniform, // equal rate over the strongest modes
    };

    std::string_view to_string(Scheme scheme);
    Scheme parse_scheme(std::string_view name); // throws ConfigError

    // Per-mode test-channel allocation over the active modes of a spectrum.
    struct Allocation
    {
        Scheme scheme = Scheme::rrwf;
        std::vector<double> d;    // noise variance per mode, kInactive for zero rate
        std::vector<double> r;    // bits per mode, measured against the true eigenvalues
        double multiplier = 0.0;  // μ for RRWF, water level γ for RWF and ASRWF, 0 for uniform
        double rate_target = 0.0; // R
        double rate_total = 0.0;  // Σ r
        double design_rate = 0.0; // rate the scheme believes it spends; differs from rate_total only for ASRWF

        std::size_t active_count() const;
    };

    // Smallest noise variance handed out, relative to the mode's eigenvalue.
    inline constexpr double kDefaultMinNoiseRel = 1e-60;

    // r(d) = log2(1 + λ/d); 0 for λ = 0 or inactive d. Throws std::domain_error for d <= 0.
    double mode_rate(double lambda, double d);

    // r'(d) = -λ / (ln2 d (λ + d)).
    double mode_rate_derivative(double lambda, double d);

    // ---- per-mode stationarity ---------------------------------------------

    // a3 t^3 + a2 t^2 + a1 t + a0.
    struct Cubic
    {
        double a3 = 0.0;
        double a2 = 0.0;
        double a1 = 0.0;
        double a0 = 0.0;

        double operator()(double t) const { return ((a3 * t + a2) * t + a1) * t + a0; }
        double derivative(double t) const { return (3.0 * a3 * t + 2.0 * a2) * t + a1; }
    };

    // All real roots in (0, inf), ascending. Roots are isolated on the monotone pieces
    // between the critical points and refined by safeguarded Newton steps.
    std::vector<double> positive_real_roots(const Cubic &p);

    // Stationarity condition of e(d) + μ r(d) in the scaled variable t = d / λ_dec:
    //   ln2 λ_dec d (λ + d)(λ_dec^2 + (2λ - λ_dec) d) - μ λ (λ_dec + d)^3 = 0
    // divided by λ_dec^5. Its sign equals the sign of the per-mode Lagrangian slope.
    Cubic stationarity_cubic(double lambda, double lambda_dec, double mu);

    // Stationary points of the per-mode Lagrangian L(d) = e(d) + μ r(d), in units of d.
    struct ModeStationaryPoints
    {
        std::vector<double> minima; // slope crosses - to +
        std::vector<double> maxima; // slope crosses + to -
        bool decreasing_at_infinity = false; // the inactive boundary is a local minimum
    };

    ModeStationaryPoints mode_stationary_points(double lambda, double lambda_dec, double mu);

    // e(d) + μ r(d); equals λ for an inactive mode.
    double mode_lagrangian(double lambda, double lambda_dec, double mu, double d);

    // Minimizer of e(d) + μ r(d) over d in [d_min, inf]: the best stationary minimum, or
    // kInactive when λ is strictly below every interior value. μ = 0 returns d_min.
    // Throws std::domain_error for μ < 0 or non-positive eigenvalues.
    double solve_mode_kkt(double lambda, double lambda_dec, double mu,
                          double min_noise_rel = kDefaultMinNoiseRel);

    // Which local solution of the per-mode problem to follow.
    enum class ModeBranch
    {
        best, // global minimizer (solve_mode_kkt)
        low,  // first stationary minimum
        peak, // stationary maximum between the two minima
        off,  // inactive
    };

    // d on the requested branch at μ, or nullopt if that branch does not exist.
    std::optional<double> mode_branch_point(double lambda, double lambda_dec, double mu, ModeBranch branch,
                                            double min_noise_rel = kDefaultMinNoiseRel);

    // ---- allocation schemes -------------------------------------------------

    struct RrwfOptions
    {
        double min_noise_rel = kDefaultMinNoiseRel;
        int max_iterations = 200;
        bool close_gap = true; // re-solve across active-set jumps of the multiplier search
    };

    // Robust reverse water-filling: bisection on μ with per-mode KKT root selection.
    // Among all evaluated allocations with Σr <= R the one with the smallest true
    // distortion Σ e_i is returned.
    Allocation rrwf(std::span<const double> lambda, std::span<const double> lambda_dec, double rate,
                    const RrwfOptions &options = {});
    Allocation rrwf(const SpectrumPair &spectrum, double rate, const RrwfOptions &options = {});

    // Classical reverse water-filling: per-mode distortion min(γ, λ_i), Σ log2(λ_i / D_i) = R,
    // solved exactly over the sorted active set.
    Allocation rwf(std::span<const double> lambda, double rate);

    enum class RateAccounting
    {
        design,    // water level meets R against the decoder eigenvalues
        true_rate, // water level rescaled so Σ log2(1 + λ_i/d_i) meets R
    };

    // Reverse water-filling designed on the decoder eigenvalues.
    Allocation asrwf(std::span<const double> lambda, std::span<const double> lambda_dec, double rate,
                     RateAccounting accounting = RateAccounting::true_rate);
    Allocation asrwf(const SpectrumPair &spectrum, double rate,
                     RateAccounting accounting = RateAccounting::true_rate);

    // R / L_strong bits on each of the L_strong largest modes.
    Allocation uniform_alloc(std::span<const double> lambda, double rate, std::size_t strong_modes);

    // Number of modes with λ_i > rel λ_1.
    std::size_t default_strong_modes(std::span<const double> lambda, double rel = 1e-3);

} // namespace csirate

#endif

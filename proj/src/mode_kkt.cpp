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

// Per-mode stationarity of e(d) + μ r(d).
//
// With t = d/λ_dec, ρ = λ/λ_dec and κ = μ/(ln2 λ_dec) the stationarity cubic reads
// ρ (1+t)^3 (φ(t) - κ) = 0 with
//
//     φ(t) = t (ρ + t)(1 + (2ρ - 1) t) / (ρ (1 + t)^3),
//     φ'(t) = Q(t) / (ρ (1 + t)^4),  Q(t) = (-2ρ^2 + 7ρ - 4) t^2 + (4ρ^2 - 4ρ + 2) t + ρ.
//
// Q(0) = ρ > 0 and the linear coefficient is always positive, so φ rises from 0 and
// either keeps rising towards φ(inf) = (2ρ - 1)/ρ or peaks once and falls back. The
// level set φ = κ therefore has at most two points: the first is a local minimum of
// the Lagrangian, the second a local maximum, and the inactive end is a local minimum
// whenever φ(inf) < κ. Solving on φ keeps κ out of the polynomial coefficients, which
// avoids the cancellation in the expanded cubic near φ(inf) = κ.

#include "csirate/allocator.hpp"
#include "csirate/rd_eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace csirate
{
    namespace
    {
        constexpr double kEps = std::numeric_limits<double>::epsilon();
        constexpr double kHuge = 1e300;

        // Root of f on [lo, hi] given a strict sign change; f and df are callables.
        // Newton steps are taken when they stay inside the bracket and the bracket keeps
        // shrinking, otherwise the bracket is bisected (geometrically on wide positive
        // ranges, since roots may sit many decades below hi).
        template <class F, class DF>
        double refine_root(F f, DF df, double lo, double hi, bool rising, double guess)
        {
            auto split = [](double a, double b) {
                if (a <= 0.0)
                    return b / 256.0;
                if (b > 16.0 * a)
                    return std::sqrt(a) * std::sqrt(b);
                return 0.5 * (a + b);
            };

            double t = (guess > lo && guess < hi) ? guess : split(lo, hi);
            double width = hi - lo;
            for (int it = 0; it < 400; ++it)
            {
                const double ft = f(t);
                if (ft == 0.0)
                    return t;
                if ((ft < 0.0) == rising)
                    lo = t;
                else
                    hi = t;
                if (hi - lo <= 2.0 * kEps * hi)
                    break;

                const double slope = df(t);
                const double newton = slope != 0.0 ? t - ft / slope : std::numeric_limits<double>::quiet_NaN();
                const double new_width = hi - lo;
                if (std::isfinite(newton) && newton > lo && newton < hi && new_width < 0.5 * width)
                {
                    if (std::abs(newton - t) <= 4.0 * kEps * t)
                        return newton;
                    t = newton;
                }
                else
                {
                    t = split(lo, hi);
                }
                width = new_width;
            }
            return 0.5 * (lo + hi);
        }

        int sign_of(double v) { return (v > 0.0) - (v < 0.0); }

        // Sign of p just to the right of t = 0.
        int sign_right_of_zero(const Cubic &p)
        {
            for (double c : {p.a0, p.a1, p.a2, p.a3})
                if (c != 0.0)
                    return sign_of(c);
            return 0;
        }

        int sign_at_infinity(const Cubic &p)
        {
            for (double c : {p.a3, p.a2, p.a1, p.a0})
                if (c != 0.0)
                    return sign_of(c);
            return 0;
        }

        struct Level
        {
            double rho;
            double kappa;

            // φ(t) - κ, in the overflow-free form with s = t/(1+t), w = 1/(1+t).
            double operator()(double t) const
            {
                const double w = 1.0 / (1.0 + t);
                const double s = t * w;
                return s * (rho * w + s) * (w + (2.0 * rho - 1.0) * s) / rho - kappa;
            }

            double derivative(double t) const
            {
                const double w = 1.0 / (1.0 + t);
                const double s = t * w;
                const double qa = -2.0 * rho * rho + 7.0 * rho - 4.0;
                const double qb = 4.0 * rho * rho - 4.0 * rho + 2.0;
                return (qa * s * s + qb * s * w + rho * w * w) * w * w / rho;
            }

            double at_infinity() const { return (2.0 * rho - 1.0) / rho - kappa; }

            // Interior maximiser of φ, or +inf when φ is increasing.
            double peak() const
            {
                const double qa = -2.0 * rho * rho + 7.0 * rho - 4.0;
                if (qa >= 0.0)
                    return kInactive;
                const double qb = 4.0 * rho * rho - 4.0 * rho + 2.0;
                return (qb + std::sqrt(qb * qb - 4.0 * qa * rho)) / (-2.0 * qa);
            }
        };

        // Bracket and refine the level crossing on [lo, inf) given the sign at lo
        // differs from the limit; returns nullopt if the crossing escapes past kHuge.
        std::optional<double> crossing_to_infinity(const Level &g, double lo, double guess = -1.0)
        {
            const double g_lo = g(lo);
            double hi = std::max(2.0 * lo, 1.0);
            while (sign_of(g(hi)) == sign_of(g_lo) && g(hi) != 0.0)
            {
                lo = hi;
                hi *= 2.0;
                if (hi > kHuge)
                    return std::nullopt;
            }
            if (g(hi) == 0.0)
                return hi;
            return refine_root([&](double t) { return g(t); }, [&](double t) { return g.derivative(t); }, lo, hi,
                               g_lo < 0.0, guess);
        }

        struct ModeRoots
        {
            std::optional<double> low;  // t of the local minimum
            std::optional<double> peak; // t of the local maximum
            bool decreasing_at_infinity = false;
        };

        ModeRoots mode_roots(double rho, double kappa)
        {
            ModeRoots out;
            const Level g{rho, kappa};
            const double g_inf = g.at_infinity();
            out.decreasing_at_infinity = g_inf < 0.0;

            const double tp = g.peak();
            auto f = [&](double t) { return g(t); };
            auto df = [&](double t) { return g.derivative(t); };
            // φ(t) ≈ t near zero, so κ is a good first guess for the low crossing.
            const double guess = kappa;

            if (!std::isfinite(tp))
            {
                if (g_inf > 0.0)
                    out.low = crossing_to_infinity(g, 0.0, guess);
                return out;
            }

            const double g_peak = g(tp);
            if (g_peak <= 0.0)
                return out; // κ at or above the maximum of φ: slope never turns positive
            out.low = refine_root(f, df, 0.0, tp, true, guess);
            if (g_inf < 0.0)
                out.peak = crossing_to_infinity(g, tp);
            return out;
        }

        void check_mode_inputs(double lambda, double lambda_dec, double mu)
        {
            if (!(lambda > 0.0) || !(lambda_dec > 0.0))
                throw std::domain_error("per-mode KKT needs positive true and decoder eigenvalues");
            if (!(mu >= 0.0))
                throw std::domain_error("Lagrange multiplier must be non-negative");
        }
    } // namespace

    std::vector<double> positive_real_roots(const Cubic &p)
    {
        std::vector<double> crit;
        {
            const double A = 3.0 * p.a3;
            const double B = 2.0 * p.a2;
            const double C = p.a1;
            if (A == 0.0)
            {
                if (B != 0.0)
                    crit.push_back(-C / B);
            }
            else
            {
                const double disc = B * B - 4.0 * A * C;
                if (disc >= 0.0)
                {
                    const double q = -0.5 * (B + std::copysign(std::sqrt(disc), B));
                    if (q != 0.0)
                    {
                        crit.push_back(q / A);
                        crit.push_back(C / q);
                    }
                    else
                    {
                        crit.push_back(0.0);
                    }
                }
            }
        }
        std::erase_if(crit, [](double c) { return !(c > 0.0) || !std::isfinite(c); });
        std::sort(crit.begin(), crit.end());
        crit.erase(std::unique(crit.begin(), crit.end()), crit.end());

        auto f = [&](double t) { return p(t); };
        auto df = [&](double t) { return p.derivative(t); };

        std::vector<double> roots;
        double lo = 0.0;
        int s_lo = sign_right_of_zero(p);
        for (double c : crit)
        {
            const double fc = p(c);
            if (fc == 0.0)
            {
                roots.push_back(c);
            }
            else if (s_lo != 0 && sign_of(fc) != s_lo)
            {
                roots.push_back(refine_root(f, df, lo, c, s_lo < 0, -1.0));
            }
            lo = c;
            s_lo = sign_of(fc);
        }

        const int s_inf = sign_at_infinity(p);
        if (s_lo != 0 && s_inf != 0 && s_inf != s_lo)
        {
            double hi = std::max(2.0 * lo, 1.0);
            while (sign_of(p(hi)) == s_lo && hi < kHuge)
            {
                lo = hi;
                hi *= 2.0;
            }
            if (p(hi) == 0.0)
                roots.push_back(hi);
            else if (sign_of(p(hi)) != s_lo)
                roots.push_back(refine_root(f, df, lo, hi, s_lo < 0, -1.0));
        }
        return roots;
    }

    Cubic stationarity_cubic(double lambda, double lambda_dec, double mu)
    {
        const double rho = lambda / lambda_dec;
        const double kappa = mu / (kLn2 * lambda_dec);
        return Cubic{2.0 * rho - 1.0 - kappa * rho, 1.0 + 2.0 * rho * rho - rho - 3.0 * kappa * rho,
                     rho - 3.0 * kappa * rho, -kappa * rho};
    }

    ModeStationaryPoints mode_stationary_points(double lambda, double lambda_dec, double mu)
    {
        check_mode_inputs(lambda, lambda_dec, mu);
        ModeStationaryPoints out;
        if (mu == 0.0)
            return out;
        const ModeRoots roots = mode_roots(lambda / lambda_dec, mu / (kLn2 * lambda_dec));
        if (roots.low)
            out.minima.push_back(*roots.low * lambda_dec);
        if (roots.peak)
            out.maxima.push_back(*roots.peak * lambda_dec);
        out.decreasing_at_infinity = roots.decreasing_at_infinity;
        return out;
    }

    double mode_lagrangian(double lambda, double lambda_dec, double mu, double d)
    {
        return mode_distortion(lambda, lambda_dec, d) + mu * mode_rate(lambda, d);
    }

    std::optional<double> mode_branch_point(double lambda, double lambda_dec, double mu, ModeBranch branch,
                                            double min_noise_rel)
    {
        check_mode_inputs(lambda, lambda_dec, mu);
        const double d_min = min_noise_rel * lambda;
        if (branch == ModeBranch::off)
            return kInactive;
        if (mu == 0.0)
        {
            if (branch == ModeBranch::peak)
                return std::nullopt;
            return d_min;
        }

        const ModeRoots roots = mode_roots(lambda / lambda_dec, mu / (kLn2 * lambda_dec));
        const std::optional<double> low =
            roots.low ? std::optional<double>(std::max(*roots.low * lambda_dec, d_min)) : std::nullopt;

        switch (branch)
        {
        case ModeBranch::low:
            return low;
        case ModeBranch::peak:
            if (!roots.peak)
                return std::nullopt;
            return std::max(*roots.peak * lambda_dec, d_min);
        case ModeBranch::best:
        default:
            break;
        }

        if (!low)
            return kInactive;
        if (!roots.decreasing_at_infinity)
            return low;
        // Both ends are local minima; the interior point wins ties.
        return mode_lagrangian(lambda, lambda_dec, mu, *low) <= lambda ? low : std::optional<double>(kInactive);
    }

    double solve_mode_kkt(double lambda, double lambda_dec, double mu, double min_noise_rel)
    {
        return *mode_branch_point(lambda, lambda_dec, mu, ModeBranch::best, min_noise_rel);
    }

} // namespace csirate

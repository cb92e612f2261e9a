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

#include "csirate/allocator.hpp"
#include "csirate/rd_eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace csirate
{
    std::string_view to_string(Scheme scheme)
    {
        switch (scheme)
        {
        case Scheme::rwf:
            return "rwf";
        case Scheme::rrwf:
            return "rrwf";
        case Scheme::asrwf:
            return "asrwf";
        case Scheme::uniform:
            return "uniform";
        }
        return "unknown";
    }

    Scheme parse_scheme(std::string_view name)
    {
        for (Scheme s : {Scheme::rwf, Scheme::rrwf, Scheme::asrwf, Scheme::uniform})
            if (name == to_string(s))
                return s;
        throw ConfigError("unknown scheme '" + std::string(name) + "' (expected rwf, rrwf, asrwf or uniform)");
    }

    std::size_t Allocation::active_count() const
    {
        return static_cast<std::size_t>(std::count_if(d.begin(), d.end(), is_active));
    }

    double mode_rate(double lambda, double d)
    {
        if (!(d > 0.0))
            throw std::domain_error("test-channel noise variance must be positive");
        if (lambda == 0.0 || !is_active(d))
            return 0.0;
        return std::log1p(lambda / d) / kLn2;
    }

    double mode_rate_derivative(double lambda, double d)
    {
        if (!(d > 0.0))
            throw std::domain_error("test-channel noise variance must be positive");
        if (!is_active(d))
            return 0.0;
        return -lambda / (kLn2 * d * (lambda + d));
    }

    namespace
    {
        void check_rate(double rate)
        {
            if (!(rate >= 0.0) || !std::isfinite(rate))
                throw std::domain_error("rate budget must be a finite non-negative number of bits");
        }

        void check_positive(std::span<const double> values, const char *what)
        {
            for (double v : values)
                if (!(v > 0.0) || !std::isfinite(v))
                    throw std::domain_error(std::string(what) + " must be positive and finite");
        }

        void fill_rates(Allocation &a, std::span<const double> lambda)
        {
            a.r.resize(a.d.size());
            a.rate_total = 0.0;
            for (std::size_t i = 0; i < a.d.size(); ++i)
            {
                a.r[i] = mode_rate(lambda[i], a.d[i]);
                a.rate_total += a.r[i];
            }
        }

        double true_distortion(std::span<const double> lambda, std::span<const double> lambda_dec,
                               const std::vector<double> &d)
        {
            double total = 0.0;
            for (std::size_t i = 0; i < d.size(); ++i)
                total += mode_distortion(lambda[i], lambda_dec[i], d[i]);
            return total;
        }

        // Multiplier search for RRWF. Every allocation it evaluates is a valid test-channel
        // point; the best one meeting the budget is kept.
        class RrwfSearch
        {
        public:
            RrwfSearch(std::span<const double> lambda, std::span<const double> lambda_dec, double rate,
                       const RrwfOptions &options)
                : lambda_(lambda), dec_(lambda_dec), rate_(rate), options_(options),
                  tol_(1e-12 * std::max(1.0, rate))
            {
            }

            // Allocation at μ with the given branch per mode, or false if a branch is missing.
            bool evaluate(double mu, const std::vector<ModeBranch> &branches, std::vector<double> &d) const
            {
                d.resize(lambda_.size());
                for (std::size_t i = 0; i < lambda_.size(); ++i)
                {
                    const auto p = mode_branch_point(lambda_[i], dec_[i], mu, branches[i], options_.min_noise_rel);
                    if (!p)
                        return false;
                    d[i] = *p;
                }
                return true;
            }

            double rate_of(const std::vector<double> &d) const
            {
                double total = 0.0;
                for (std::size_t i = 0; i < d.size(); ++i)
                    total += mode_rate(lambda_[i], d[i]);
                return total;
            }

            // Records the point if it meets the budget; returns its total rate.
            double consider(double mu, const std::vector<double> &d)
            {
                const double rate = rate_of(d);
                if (rate <= rate_ + tol_)
                {
                    const double dist = true_distortion(lambda_, dec_, d);
                    const bool better = !have_best_ || dist < best_distortion_ ||
                                        (dist == best_distortion_ && rate > best_rate_);
                    if (better)
                    {
                        have_best_ = true;
                        best_distortion_ = dist;
                        best_rate_ = rate;
                        best_mu_ = mu;
                        best_d_ = d;
                    }
                }
                return rate;
            }

            double global_rate(double mu)
            {
                std::vector<double> d;
                evaluate(mu, std::vector<ModeBranch>(lambda_.size(), ModeBranch::best), d);
                return consider(mu, d);
            }

            Allocation run()
            {
                const std::size_t n = lambda_.size();

                const double top = n ? *std::max_element(lambda_.begin(), lambda_.end()) : 0.0;
                double mu_hi = kLn2 * std::max(top, std::numeric_limits<double>::min());
                double rate_hi = global_rate(mu_hi);
                int guard = 0;
                while (rate_hi > rate_ || (rate_ > 0.0 && rate_hi == rate_))
                {
                    mu_hi *= 2.0;
                    rate_hi = global_rate(mu_hi);
                    if (++guard > 2000)
                        throw ConvergenceError("RRWF could not bracket the multiplier from above", rate_, rate_hi,
                                               guard);
                }
                if (rate_ == 0.0 || n == 0)
                    return finish();

                double mu_lo = mu_hi;
                double rate_lo = rate_hi;
                while (rate_lo < rate_)
                {
                    mu_hi = mu_lo;
                    rate_hi = rate_lo;
                    mu_lo *= 0.5;
                    if (mu_lo < 1e-300)
                    {
                        // Budget above what d_min can absorb: spend the maximum.
                        global_rate(0.0);
                        return finish();
                    }
                    rate_lo = global_rate(mu_lo);
                }
                if (std::abs(rate_lo - rate_) <= tol_)
                    return finish();

                for (int it = 0; it < options_.max_iterations; ++it)
                {
                    const double mid = std::sqrt(mu_lo) * std::sqrt(mu_hi);
                    if (!(mid > mu_lo && mid < mu_hi))
                        return close_gap(mu_lo, mu_hi);
                    const double rate_mid = global_rate(mid);
                    if (std::abs(rate_mid - rate_) <= tol_)
                        return finish();
                    if (rate_mid > rate_)
                        mu_lo = mid;
                    else
                        mu_hi = mid;
                }
                if (!options_.close_gap)
                    throw ConvergenceError("RRWF multiplier bisection did not converge", rate_, best_rate_,
                                           options_.max_iterations);
                return close_gap(mu_lo, mu_hi);
            }

            // True when the multiplier search hit a rate jump; otherwise the result meets the
            // budget with every mode at its global minimizer and is optimal.
            bool gap_detected() const { return gap_; }

        private:
            // The total rate jumps across R at μ*: some modes switch between their low
            // stationary point and the inactive end. Enumerate low/peak/off for those modes,
            // trace each branch combination over a wide μ range and keep every point that
            // meets the budget.
            Allocation close_gap(double mu_lo, double mu_hi)
            {
                gap_ = true;
                if (!options_.close_gap)
                    return finish();

                const std::size_t n = lambda_.size();
                std::vector<double> d_lo, d_hi;
                const std::vector<ModeBranch> global(n, ModeBranch::best);
                evaluate(mu_lo, global, d_lo);
                evaluate(mu_hi, global, d_hi);

                // Modes that flip across the jump come first, then bistable modes ordered by
                // how close their interior minimum is to the inactive value λ, then the rest by
                // eigenvalue.
                const double mu_star = std::sqrt(mu_lo) * std::sqrt(mu_hi);
                std::vector<std::size_t> switching;
                std::vector<std::pair<double, std::size_t>> others;
                for (std::size_t i = 0; i < n; ++i)
                {
                    if (is_active(d_lo[i]) != is_active(d_hi[i]))
                    {
                        switching.push_back(i);
                        continue;
                    }
                    double closeness = std::numeric_limits<double>::infinity();
                    const ModeStationaryPoints sp = mode_stationary_points(lambda_[i], dec_[i], mu_star);
                    if (!sp.minima.empty() && !sp.maxima.empty())
                    {
                        const double low = std::max(sp.minima.front(), options_.min_noise_rel * lambda_[i]);
                        closeness =
                            std::abs(mode_lagrangian(lambda_[i], dec_[i], mu_star, low) - lambda_[i]) / lambda_[i];
                    }
                    others.emplace_back(closeness, i);
                }
                std::stable_sort(others.begin(), others.end(), [&](const auto &a, const auto &b) {
                    if (a.first != b.first)
                        return a.first < b.first;
                    return lambda_[a.second] > lambda_[b.second];
                });
                for (const auto &[closeness, i] : others)
                    if (switching.size() < kMaxSwitching)
                        switching.push_back(i);
                if (switching.size() > kMaxSwitching)
                    switching.resize(kMaxSwitching);

                std::vector<double> grid(kGridPoints);
                for (std::size_t k = 0; k < kGridPoints; ++k)
                    grid[k] = mu_star * std::pow(10.0, -kGridDecades + 2.0 * kGridDecades * static_cast<double>(k) /
                                                                          static_cast<double>(kGridPoints - 1));

                std::size_t combos = 1;
                for (std::size_t j = 0; j < switching.size(); ++j)
                    combos *= 3;
                const ModeBranch choice[3] = {ModeBranch::low, ModeBranch::peak, ModeBranch::off};

                std::vector<double> d;
                for (std::size_t code = 0; code < combos; ++code)
                {
                    std::vector<ModeBranch> branches(n, ModeBranch::best);
                    std::size_t c = code;
                    for (std::size_t j : switching)
                    {
                        branches[j] = choice[c % 3];
                        c /= 3;
                    }

                    double prev_mu = 0.0;
                    double prev_gap = 0.0;
                    bool prev_ok = false;
                    bool started = false;
                    for (double mu : grid)
                    {
                        const bool ok = evaluate(mu, branches, d);
                        const double gap = ok ? consider(mu, d) - rate_ : 0.0;
                        if (started && ok != prev_ok)
                        {
                            // A pinned branch folds away between grid points; the crossing
                            // may sit between the last valid point and the fold.
                            const double valid_mu = prev_ok ? prev_mu : mu;
                            const double valid_gap = prev_ok ? prev_gap : gap;
                            const double edge = fold_edge(valid_mu, prev_ok ? mu : prev_mu, branches);
                            evaluate(edge, branches, d);
                            const double edge_gap = consider(edge, d) - rate_;
                            if ((edge_gap > 0.0) != (valid_gap > 0.0))
                                refine_branch(valid_mu, valid_gap, edge, branches);
                        }
                        else if (ok && prev_ok && (gap > 0.0) != (prev_gap > 0.0))
                        {
                            refine_branch(prev_mu, prev_gap, mu, branches);
                        }
                        started = true;
                        prev_ok = ok;
                        prev_mu = mu;
                        prev_gap = gap;
                    }
                }
                return finish();
            }

            // Last μ next to `invalid` at which every pinned branch still exists.
            double fold_edge(double valid, double invalid, const std::vector<ModeBranch> &branches) const
            {
                std::vector<double> d;
                for (int it = 0; it < 200; ++it)
                {
                    const double mid = std::sqrt(valid) * std::sqrt(invalid);
                    if (!(mid > std::min(valid, invalid) && mid < std::max(valid, invalid)))
                        break;
                    if (evaluate(mid, branches, d))
                        valid = mid;
                    else
                        invalid = mid;
                }
                return valid;
            }

            // Geometric bisection of rate(μ) = R on one branch combination.
            void refine_branch(double mu_a, double gap_a, double mu_b, const std::vector<ModeBranch> &branches)
            {
                std::vector<double> d;
                for (int it = 0; it < options_.max_iterations; ++it)
                {
                    const double mid = std::sqrt(mu_a) * std::sqrt(mu_b);
                    if (!(mid > std::min(mu_a, mu_b) && mid < std::max(mu_a, mu_b)))
                        return;
                    if (!evaluate(mid, branches, d))
                        return;
                    const double gap = consider(mid, d) - rate_;
                    if (std::abs(gap) <= tol_)
                        return;
                    if ((gap > 0.0) == (gap_a > 0.0))
                    {
                        mu_a = mid;
                        gap_a = gap;
                    }
                    else
                    {
                        mu_b = mid;
                    }
                }
            }

            Allocation finish() const
            {
                Allocation a;
                a.scheme = Scheme::rrwf;
                a.rate_target = rate_;
                a.multiplier = best_mu_;
                a.d = have_best_ ? best_d_ : std::vector<double>(lambda_.size(), kInactive);
                fill_rates(a, lambda_);
                a.design_rate = a.rate_total;
                return a;
            }

            static constexpr std::size_t kMaxSwitching = 4;
            static constexpr std::size_t kGridPoints = 481;
            static constexpr double kGridDecades = 6.0;

            std::span<const double> lambda_;
            std::span<const double> dec_;
            double rate_;
            RrwfOptions options_;
            double tol_;

            bool gap_ = false;
            bool have_best_ = false;
            double best_distortion_ = 0.0;
            double best_rate_ = 0.0;
            double best_mu_ = 0.0;
            std::vector<double> best_d_;
        };

        // Water level for Σ log2(λ_i / min(γ, λ_i)) = R over a descending order.
        double water_level(std::span<const double> lambda, const std::vector<std::size_t> &order, double rate)
        {
            double log_sum = 0.0;
            for (std::size_t k = 0; k < order.size(); ++k)
            {
                log_sum += std::log(lambda[order[k]]);
                const double gamma = std::exp((log_sum - rate * kLn2) / static_cast<double>(k + 1));
                if (k + 1 == order.size() || gamma >= lambda[order[k + 1]])
                    return gamma;
            }
            return 0.0;
        }

        std::vector<std::size_t> descending_order(std::span<const double> values)
        {
            std::vector<std::size_t> order(values.size());
            std::iota(order.begin(), order.end(), 0);
            std::stable_sort(order.begin(), order.end(),
                             [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
            return order;
        }

        // Reverse water-filling noise variances at level γ: λγ/(λ - γ) below the level.
        std::vector<double> noise_at_level(std::span<const double> lambda, double gamma)
        {
            std::vector<double> d(lambda.size(), kInactive);
            for (std::size_t i = 0; i < lambda.size(); ++i)
                if (gamma < lambda[i])
                    d[i] = lambda[i] * gamma / (lambda[i] - gamma);
            return d;
        }
    } // namespace

    Allocation rrwf(std::span<const double> lambda, std::span<const double> lambda_dec, double rate,
                    const RrwfOptions &options)
    {
        if (lambda.size() != lambda_dec.size())
            throw DimensionError("true and decoder spectra differ in length");
        check_rate(rate);
        check_positive(lambda, "eigenvalues");
        check_positive(lambda_dec, "decoder eigenvalues");
        RrwfSearch search(lambda, lambda_dec, rate, options);
        Allocation best = search.run();
        if (!options.close_gap || !search.gap_detected())
            return best;

        // Active-set pruning: switching a mode off frees rate that the remaining modes may use
        // better than the multiplier search alone finds when several modes jump together.
        // Pinned modes stay off; every other mode may re-enter in the reduced search.
        double best_dist = true_distortion(lambda, lambda_dec, best.d);
        std::vector<bool> pinned(lambda.size(), false);
        for (std::size_t round = 0; round < lambda.size(); ++round)
        {
            std::optional<Allocation> improved;
            std::size_t improved_pin = 0;
            for (std::size_t i = 0; i < lambda.size(); ++i)
            {
                if (pinned[i] || !is_active(best.d[i]))
                    continue;
                std::vector<std::size_t> keep;
                for (std::size_t j = 0; j < lambda.size(); ++j)
                    if (j != i && !pinned[j])
                        keep.push_back(j);
                std::vector<double> sub_lambda, sub_dec;
                for (std::size_t j : keep)
                {
                    sub_lambda.push_back(lambda[j]);
                    sub_dec.push_back(lambda_dec[j]);
                }
                RrwfSearch sub(sub_lambda, sub_dec, rate, options);
                const Allocation part = sub.run();
                std::vector<double> d(lambda.size(), kInactive);
                for (std::size_t k = 0; k < keep.size(); ++k)
                    d[keep[k]] = part.d[k];
                const double dist = true_distortion(lambda, lambda_dec, d);
                if (dist < best_dist)
                {
                    best_dist = dist;
                    improved = best;
                    improved->d = std::move(d);
                    improved->multiplier = part.multiplier;
                    improved_pin = i;
                }
            }
            if (!improved)
                break;
            pinned[improved_pin] = true;
            best = std::move(*improved);
            fill_rates(best, lambda);
            best.design_rate = best.rate_total;
        }
        return best;
    }

    Allocation rrwf(const SpectrumPair &spectrum, double rate, const RrwfOptions &options)
    {
        return rrwf(spectrum.active_true(), spectrum.active_dec(), rate, options);
    }

    Allocation rwf(std::span<const double> lambda, double rate)
    {
        check_rate(rate);
        check_positive(lambda, "eigenvalues");
        Allocation a;
        a.scheme = Scheme::rwf;
        a.rate_target = rate;
        if (lambda.empty())
            return a;

        if (rate == 0.0)
        {
            a.multiplier = *std::max_element(lambda.begin(), lambda.end());
            a.d.assign(lambda.size(), kInactive);
        }
        else
        {
            a.multiplier = water_level(lambda, descending_order(lambda), rate);
            a.d = noise_at_level(lambda, a.multiplier);
        }
        fill_rates(a, lambda);
        a.design_rate = a.rate_total;
        return a;
    }

    Allocation asrwf(std::span<const double> lambda, std::span<const double> lambda_dec, double rate,
                     RateAccounting accounting)
    {
        if (lambda.size() != lambda_dec.size())
            throw DimensionError("true and decoder spectra differ in length");
        check_positive(lambda, "eigenvalues");
        Allocation a = rwf(lambda_dec, rate);
        a.scheme = Scheme::asrwf;

        auto design_rate = [&](const std::vector<double> &d) {
            double total = 0.0;
            for (std::size_t i = 0; i < d.size(); ++i)
                total += mode_rate(lambda_dec[i], d[i]);
            return total;
        };
        auto true_rate = [&](const std::vector<double> &d) {
            double total = 0.0;
            for (std::size_t i = 0; i < d.size(); ++i)
                total += mode_rate(lambda[i], d[i]);
            return total;
        };

        if (accounting == RateAccounting::true_rate && rate > 0.0 && !lambda.empty())
        {
            const double tol = 1e-12 * std::max(1.0, rate);
            double gamma = a.multiplier;
            if (std::abs(true_rate(a.d) - rate) > tol)
            {
                // Σ log2(1 + λ_i / d_i(γ)) falls as γ rises; bracket then bisect log γ.
                double hi = *std::max_element(lambda_dec.begin(), lambda_dec.end());
                double lo = gamma;
                while (true_rate(noise_at_level(lambda_dec, lo)) < rate)
                {
                    hi = lo;
                    lo *= 0.5;
                    if (lo < 1e-300)
                        throw ConvergenceError("ASRWF water level cannot reach the true-rate budget", rate,
                                               true_rate(noise_at_level(lambda_dec, lo)), 0);
                }
                if (true_rate(noise_at_level(lambda_dec, hi)) > rate)
                    hi = gamma;
                gamma = lo;
                for (int it = 0; it < 200; ++it)
                {
                    const double mid = std::sqrt(lo) * std::sqrt(hi);
                    if (!(mid > lo && mid < hi))
                        break;
                    const double r = true_rate(noise_at_level(lambda_dec, mid));
                    if (std::abs(r - rate) <= tol)
                    {
                        gamma = mid;
                        break;
                    }
                    if (r > rate)
                        lo = mid;
                    else
                        hi = mid;
                    gamma = hi;
                }
                a.multiplier = gamma;
                a.d = noise_at_level(lambda_dec, gamma);
            }
        }
        fill_rates(a, lambda);
        a.design_rate = design_rate(a.d);
        return a;
    }

    Allocation asrwf(const SpectrumPair &spectrum, double rate, RateAccounting accounting)
    {
        return asrwf(spectrum.active_true(), spectrum.active_dec(), rate, accounting);
    }

    Allocation uniform_alloc(std::span<const double> lambda, double rate, std::size_t strong_modes)
    {
        check_rate(rate);
        check_positive(lambda, "eigenvalues");
        if (strong_modes < 1 || strong_modes > lambda.size())
            throw std::domain_error("uniform allocation needs 1 <= L_strong <= number of active modes");

        Allocation a;
        a.scheme = Scheme::uniform;
        a.rate_target = rate;
        a.d.assign(lambda.size(), kInactive);
        if (rate > 0.0)
        {
            const double per_mode = rate / static_cast<double>(strong_modes);
            const double denom = std::expm1(per_mode * kLn2);
            const std::vector<std::size_t> order = descending_order(lambda);
            for (std::size_t k = 0; k < strong_modes; ++k)
                a.d[order[k]] = lambda[order[k]] / denom;
        }
        fill_rates(a, lambda);
        a.design_rate = a.rate_total;
        return a;
    }

    std::size_t default_strong_modes(std::span<const double> lambda, double rel)
    {
        if (lambda.empty())
            return 0;
        const double top = *std::max_element(lambda.begin(), lambda.end());
        return static_cast<std::size_t>(
            std::count_if(lambda.begin(), lambda.end(), [&](double v) { return v > rel * top; }));
    }

} // namespace csirate

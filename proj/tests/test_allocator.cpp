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

#include "oracles.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numeric>
#include <random>

using namespace csirate;

namespace
{
    double true_distortion(const std::vector<double> &lambda, const std::vector<double> &dec, const Allocation &a)
    {
        double total = 0.0;
        for (std::size_t i = 0; i < lambda.size(); ++i)
            total += oracle::mode_error(lambda[i], dec[i], a.d[i]);
        return total;
    }

    double oracle_lagrangian(double lambda, double dec, double mu, double d)
    {
        return oracle::mode_error(lambda, dec, d) + mu * oracle::mode_rate(lambda, d);
    }

    void check_allocation_invariants(const std::vector<double> &lambda, const Allocation &a, double rate)
    {
        REQUIRE(a.d.size() == lambda.size());
        double sum = 0.0;
        for (std::size_t i = 0; i < lambda.size(); ++i)
        {
            CHECK(a.d[i] > 0.0);
            CHECK(std::abs(a.r[i] - oracle::mode_rate(lambda[i], a.d[i])) <= 1e-9);
            sum += a.r[i];
        }
        CHECK(std::abs(a.rate_total - sum) <= 1e-9 * std::max(1.0, sum));
        CHECK(a.rate_total <= rate + 1e-6);
    }
}

TEST_CASE("mode rate")
{
    CHECK(mode_rate(1.0, 1.0) == Catch::Approx(1.0));
    CHECK(mode_rate(3.0, 1.0) == Catch::Approx(2.0));
    CHECK(mode_rate(1.0, kInactive) == 0.0);
    CHECK(mode_rate(1.0, 1e300) < 1e-299);
    CHECK(mode_rate(0.0, 2.0) == 0.0);
    CHECK_THROWS_AS(mode_rate(1.0, 0.0), std::domain_error);
    CHECK_THROWS_AS(mode_rate(1.0, -1.0), std::domain_error);

    for (double d : {1e-3, 0.7, 5.0, 1e4})
    {
        const double fd = oracle::central_difference([](double x) { return oracle::mode_rate(2.5, x); }, d, 1e-6 * d);
        CHECK(mode_rate_derivative(2.5, d) == Catch::Approx(fd).epsilon(1e-6));
    }
}

TEST_CASE("scheme names round-trip")
{
    for (Scheme s : {Scheme::rwf, Scheme::rrwf, Scheme::asrwf, Scheme::uniform})
        CHECK(parse_scheme(to_string(s)) == s);
    CHECK_THROWS_AS(parse_scheme("waterfill"), ConfigError);
}

TEST_CASE("positive real roots of cubics")
{
    // (t - 1)(t - 2)(t - 3)
    auto roots = positive_real_roots(Cubic{1.0, -6.0, 11.0, -6.0});
    REQUIRE(roots.size() == 3);
    CHECK(roots[0] == Catch::Approx(1.0).epsilon(1e-13));
    CHECK(roots[1] == Catch::Approx(2.0).epsilon(1e-13));
    CHECK(roots[2] == Catch::Approx(3.0).epsilon(1e-13));

    // (t + 1)(t - 0.5)(t - 4e5)
    roots = positive_real_roots(Cubic{1.0, 1.0 - 0.5 - 4e5, -0.5 - 4e5 + 2e5, 2e5});
    REQUIRE(roots.size() == 2);
    CHECK(roots[0] == Catch::Approx(0.5).epsilon(1e-12));
    CHECK(roots[1] == Catch::Approx(4e5).epsilon(1e-12));

    // t (t - 2)(t - 7): the root at zero is not positive.
    roots = positive_real_roots(Cubic{1.0, -9.0, 14.0, 0.0});
    REQUIRE(roots.size() == 2);
    CHECK(roots[0] == Catch::Approx(2.0).epsilon(1e-13));
    CHECK(roots[1] == Catch::Approx(7.0).epsilon(1e-13));

    CHECK(positive_real_roots(Cubic{1.0, 3.0, 3.0, 1.0}).empty()); // (t + 1)^3
    CHECK(positive_real_roots(Cubic{0.0, 1.0, 0.0, 1.0}).empty()); // t^2 + 1

    roots = positive_real_roots(Cubic{0.0, 2.0, -3.0, 1.0}); // (2t - 1)(t - 1)
    REQUIRE(roots.size() == 2);
    CHECK(roots[0] == Catch::Approx(0.5).epsilon(1e-13));
    CHECK(roots[1] == Catch::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("stationarity cubic has the sign of the Lagrangian slope")
{
    std::mt19937_64 gen(12);
    for (int trial = 0; trial < 200; ++trial)
    {
        const double lambda = oracle::log_uniform(gen, 1e-2, 1e2);
        const double dec = oracle::log_uniform(gen, 1e-2, 1e2);
        const double mu = oracle::log_uniform(gen, 1e-3, 1e3);
        const Cubic p = stationarity_cubic(lambda, dec, mu);
        for (double t : {1e-3, 0.1, 0.9, 3.0, 40.0})
        {
            const double d = t * dec;
            const double slope = oracle::central_difference(
                [&](double x) { return oracle_lagrangian(lambda, dec, mu, x); }, d, 1e-5 * d);
            const double value = p(t);
            if (std::abs(slope) > 1e-6 * (std::abs(mode_distortion_derivative(lambda, dec, d)) +
                                          mu * std::abs(mode_rate_derivative(lambda, d))))
                CHECK((value > 0.0) == (slope > 0.0));
        }
        // Roots of the cubic are stationary points of the Lagrangian and vice versa.
        const ModeStationaryPoints sp = mode_stationary_points(lambda, dec, mu);
        std::vector<double> all = sp.minima;
        all.insert(all.end(), sp.maxima.begin(), sp.maxima.end());
        std::sort(all.begin(), all.end());
        const std::vector<double> roots = positive_real_roots(p);
        REQUIRE(roots.size() == all.size());
        for (std::size_t k = 0; k < roots.size(); ++k)
            CHECK(roots[k] * dec == Catch::Approx(all[k]).epsilon(1e-7));
    }
}

TEST_CASE("per-mode KKT: matched modes sit at the water level")
{
    for (double lambda : {0.3, 1.0, 17.0})
        for (double level : {0.01, 0.2, 0.9})
        {
            const double mu = level * lambda * kLn2;
            const double d = solve_mode_kkt(lambda, lambda, mu);
            REQUIRE(is_active(d));
            CHECK(mode_distortion(lambda, lambda, d) == Catch::Approx(mu / kLn2).epsilon(1e-10));
        }
    CHECK_FALSE(is_active(solve_mode_kkt(2.0, 2.0, 1.1 * 2.0 * kLn2)));
}

TEST_CASE("per-mode KKT boundaries and errors")
{
    CHECK(solve_mode_kkt(2.0, 3.0, 0.0) == 2.0 * kDefaultMinNoiseRel);
    CHECK(solve_mode_kkt(2.0, 3.0, 0.0, 1e-12) == 2.0e-12);
    CHECK_THROWS_AS(solve_mode_kkt(1.0, 1.0, -0.1), std::domain_error);
    CHECK_THROWS_AS(solve_mode_kkt(0.0, 1.0, 0.1), std::domain_error);
    CHECK_THROWS_AS(solve_mode_kkt(1.0, 0.0, 0.1), std::domain_error);
}

TEST_CASE("per-mode KKT for lambda=1, lambda_dec=2, mu=0.5 matches a brute-force scan")
{
    // Scan of e(d) + 0.5 r(d) over 10^6 log-spaced points in [1e-9, 1e6]. The Lagrangian
    // keeps decreasing towards the top of the range, so the scan optimum is its upper
    // end and the exact minimizer is the inactive boundary.
    const double lambda = 1.0, dec = 2.0, mu = 0.5;
    const int points = 1000000;
    double best = oracle::kInf;
    double best_d = 0.0;
    for (int k = 0; k < points; ++k)
    {
        const double d = 1e-9 * std::pow(1e15, static_cast<double>(k) / (points - 1));
        const double v = oracle_lagrangian(lambda, dec, mu, d);
        if (v < best)
        {
            best = v;
            best_d = d;
        }
    }
    const double d = solve_mode_kkt(lambda, dec, mu);
    const double ours = oracle_lagrangian(lambda, dec, mu, d);
    CHECK(ours <= best * (1.0 + 1e-12));
    CHECK(best_d == Catch::Approx(1e6).epsilon(1e-4));
    CHECK_FALSE(is_active(d));
    CHECK(best == Catch::Approx(lambda).epsilon(1e-4));
}

TEST_CASE("per-mode KKT never loses to a dense scan")
{
    std::mt19937_64 gen(99);
    const std::vector<double> grid = oracle::log_grid(1e-9, 1e9, 20001);
    for (int trial = 0; trial < 300; ++trial)
    {
        const double lambda = oracle::log_uniform(gen, 1e-3, 1e3);
        const double dec = lambda * oracle::log_uniform(gen, 1e-2, 1e2);
        const double mu = lambda * oracle::log_uniform(gen, 1e-4, 10.0);
        double scan = lambda;
        for (double g : grid)
            scan = std::min(scan, oracle_lagrangian(lambda, dec, mu, g * lambda));
        const double d = solve_mode_kkt(lambda, dec, mu);
        CHECK(oracle_lagrangian(lambda, dec, mu, d) <= scan * (1.0 + 1e-9) + 1e-15 * lambda);
    }
}

TEST_CASE("branch points")
{
    // λ_dec far above 2λ gives two stationary points for moderate μ.
    const double lambda = 1.0, dec = 20.0;
    bool saw_pair = false;
    for (double mu : {0.05, 0.2, 0.5, 1.0})
    {
        const ModeStationaryPoints sp = mode_stationary_points(lambda, dec, mu);
        const auto low = mode_branch_point(lambda, dec, mu, ModeBranch::low);
        const auto peak = mode_branch_point(lambda, dec, mu, ModeBranch::peak);
        CHECK(*mode_branch_point(lambda, dec, mu, ModeBranch::off) == kInactive);
        CHECK(*mode_branch_point(lambda, dec, mu, ModeBranch::best) == solve_mode_kkt(lambda, dec, mu));
        if (!sp.minima.empty() && !sp.maxima.empty())
        {
            saw_pair = true;
            REQUIRE(low);
            REQUIRE(peak);
            CHECK(*low < *peak);
            CHECK(mode_lagrangian(lambda, dec, mu, *peak) >= mode_lagrangian(lambda, dec, mu, *low));
            CHECK(mode_lagrangian(lambda, dec, mu, *peak) >= lambda);
        }
    }
    CHECK(saw_pair);
    CHECK_FALSE(mode_branch_point(1.0, 1.0, 0.1, ModeBranch::peak).has_value());
}

TEST_CASE("classical reverse water-filling examples")
{
    const std::vector<double> lambda = {4.0, 1.0};
    Allocation a = rwf(lambda, 3.0);
    CHECK(a.multiplier == Catch::Approx(std::sqrt(0.5)).epsilon(1e-12));
    CHECK(evaluate_allocation(SpectrumPair{CMatrix(), lambda, lambda, 2}, a).d_quant ==
          Catch::Approx(2.0 * std::sqrt(0.5)).epsilon(1e-12));
    CHECK(a.active_count() == 2);
    check_allocation_invariants(lambda, a, 3.0);

    a = rwf(lambda, 1.0);
    CHECK(a.multiplier == Catch::Approx(2.0).epsilon(1e-12));
    CHECK_FALSE(is_active(a.d[1]));
    CHECK(true_distortion(lambda, lambda, a) == Catch::Approx(3.0).epsilon(1e-12));

    a = rwf(lambda, 0.0);
    CHECK(a.active_count() == 0);
    CHECK(true_distortion(lambda, lambda, a) == 5.0);

    double prev = 5.0;
    for (double r : {10.0, 40.0, 100.0, 200.0})
    {
        const double d = true_distortion(lambda, lambda, rwf(lambda, r));
        CHECK(d < prev);
        prev = d;
    }
    CHECK(prev < 1e-28);
    CHECK_THROWS(rwf(lambda, -1.0));
}

TEST_CASE("reverse water-filling agrees with a bisection oracle")
{
    std::mt19937_64 gen(4);
    for (int trial = 0; trial < 100; ++trial)
    {
        const std::size_t n = 1 + trial % 9;
        std::vector<double> lambda;
        for (std::size_t i = 0; i < n; ++i)
            lambda.push_back(oracle::log_uniform(gen, 1e-3, 1e3));
        const double rate = oracle::log_uniform(gen, 0.1, 80.0);
        const Allocation a = rwf(lambda, rate);
        const std::vector<double> ref = oracle::water_fill_distortions(lambda, rate);
        for (std::size_t i = 0; i < n; ++i)
            CHECK(oracle::mode_error(lambda[i], lambda[i], a.d[i]) == Catch::Approx(ref[i]).epsilon(1e-9));
        CHECK(a.rate_total == Catch::Approx(rate).epsilon(1e-9));
    }
}

TEST_CASE("RRWF on a matched spectrum is classical reverse water-filling")
{
    std::mt19937_64 gen(8);
    for (int trial = 0; trial < 50; ++trial)
    {
        const std::size_t n = 1 + trial % 8;
        std::vector<double> lambda;
        for (std::size_t i = 0; i < n; ++i)
            lambda.push_back(oracle::log_uniform(gen, 1e-2, 1e2));
        const double rate = oracle::log_uniform(gen, 0.5, 60.0);
        const Allocation a = rrwf(lambda, lambda, rate);
        const Allocation b = rwf(lambda, rate);
        for (std::size_t i = 0; i < n; ++i)
        {
            CHECK(is_active(a.d[i]) == is_active(b.d[i]));
            if (is_active(b.d[i]))
                CHECK(a.d[i] == Catch::Approx(b.d[i]).epsilon(1e-6));
        }
        CHECK(true_distortion(lambda, lambda, a) ==
              Catch::Approx(true_distortion(lambda, lambda, b)).epsilon(1e-9));
    }
}

TEST_CASE("RRWF two-mode example against the constrained grid")
{
    const std::vector<double> lambda = {1.0, 0.5};
    const std::vector<double> dec = {2.0, 0.25};
    const Allocation a = rrwf(lambda, dec, 2.0);
    check_allocation_invariants(lambda, a, 2.0);
    const double grid = oracle::grid_optimum(lambda, dec, 2.0, 2000);
    CHECK(true_distortion(lambda, dec, a) <= grid * (1.0 + 1e-3));

    const Allocation zero = rrwf(lambda, dec, 0.0);
    CHECK(zero.active_count() == 0);
    CHECK(true_distortion(lambda, dec, zero) == 1.5);
}

TEST_CASE("RRWF never loses to a feasible grid point on four modes")
{
    // Every grid point meets the budget, so the grid value bounds the optimum from above.
    std::mt19937_64 gen(31);
    for (int trial = 0; trial < 40; ++trial)
    {
        std::vector<double> lambda, dec;
        for (int i = 0; i < 4; ++i)
        {
            lambda.push_back(oracle::log_uniform(gen, 1e-2, 1e2));
            dec.push_back(lambda.back() * oracle::log_uniform(gen, 1e-2, 1e2));
        }
        const double rate = oracle::log_uniform(gen, 0.3, 20.0);
        const Allocation a = rrwf(lambda, dec, rate);
        check_allocation_invariants(lambda, a, rate);
        const double grid = oracle::grid_optimum(lambda, dec, rate, 160);
        CHECK(true_distortion(lambda, dec, a) <= grid * (1.0 + 1e-9));
    }
}

TEST_CASE("RRWF satisfies the stationarity certificate")
{
    std::mt19937_64 gen(21);
    for (int trial = 0; trial < 60; ++trial)
    {
        const std::size_t n = 2 + trial % 6;
        std::vector<double> lambda, dec;
        for (std::size_t i = 0; i < n; ++i)
        {
            lambda.push_back(oracle::log_uniform(gen, 1e-2, 1e2));
            dec.push_back(lambda.back() * oracle::log_uniform(gen, 0.1, 10.0));
        }
        const double rate = oracle::log_uniform(gen, 0.5, 40.0);
        const Allocation a = rrwf(lambda, dec, rate);
        check_allocation_invariants(lambda, a, rate);
        const double mu = a.multiplier;
        for (std::size_t i = 0; i < n; ++i)
        {
            if (!is_active(a.d[i]))
                continue;
            const double ep = mode_distortion_derivative(lambda[i], dec[i], a.d[i]);
            const double rp = mode_rate_derivative(lambda[i], a.d[i]);
            CHECK(std::abs(ep + mu * rp) <= 1e-6 * std::max(std::abs(ep), mu * std::abs(rp)));
        }
    }
}

TEST_CASE("RRWF distortion is non-increasing in the budget")
{
    std::mt19937_64 gen(77);
    for (int trial = 0; trial < 20; ++trial)
    {
        std::vector<double> lambda, dec;
        for (int i = 0; i < 5; ++i)
        {
            lambda.push_back(oracle::log_uniform(gen, 1e-2, 1e2));
            dec.push_back(lambda.back() * oracle::log_uniform(gen, 0.1, 10.0));
        }
        double prev = oracle::kInf;
        for (double rate : {0.0, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0})
        {
            const double d = true_distortion(lambda, dec, rrwf(lambda, dec, rate));
            CHECK(d <= prev * (1.0 + 1e-12));
            prev = d;
        }
    }
}

TEST_CASE("RRWF reports non-convergence when gap closing is disabled")
{
    RrwfOptions opt;
    opt.max_iterations = 1;
    opt.close_gap = false;
    CHECK_THROWS_AS(rrwf(std::vector<double>{3.0, 1.0, 0.2}, std::vector<double>{2.0, 1.5, 0.1}, 5.0, opt),
                    ConvergenceError);
    CHECK_THROWS(rrwf(std::vector<double>{1.0}, std::vector<double>{1.0, 2.0}, 1.0));
    CHECK_THROWS(rrwf(std::vector<double>{1.0}, std::vector<double>{0.0}, 1.0));
}

TEST_CASE("assumed-statistics water-filling")
{
    const std::vector<double> lambda = {4.0, 1.0, 0.3};
    const Allocation matched = asrwf(lambda, lambda, 3.0);
    const Allocation classical = rwf(lambda, 3.0);
    for (std::size_t i = 0; i < 3; ++i)
        CHECK(matched.d[i] == Catch::Approx(classical.d[i]).epsilon(1e-12));

    const std::vector<double> doubled = {8.0, 2.0, 0.6};
    for (double rate : {0.5, 2.0, 5.0, 9.0})
    {
        // Designing on 2λ doubles the water level and keeps the active set.
        const Allocation b = rwf(lambda, rate);
        const Allocation design = asrwf(lambda, doubled, rate, RateAccounting::design);
        for (std::size_t i = 0; i < 3; ++i)
            CHECK(is_active(design.d[i]) == is_active(b.d[i]));
        CHECK(design.multiplier == Catch::Approx(2.0 * b.multiplier).epsilon(1e-12));

        const Allocation a = asrwf(lambda, doubled, rate);
        CHECK(a.rate_total == Catch::Approx(rate).epsilon(1e-9));
        check_allocation_invariants(lambda, a, rate);

        CHECK(design.design_rate == Catch::Approx(rate).epsilon(1e-9));
        double dec_rate = 0.0;
        for (std::size_t i = 0; i < 3; ++i)
            dec_rate += oracle::mode_rate(doubled[i], design.d[i]);
        CHECK(dec_rate == Catch::Approx(rate).epsilon(1e-9));
    }

    const Allocation zero = asrwf(lambda, doubled, 0.0);
    CHECK(zero.active_count() == 0);
}

TEST_CASE("uniform allocation")
{
    const std::vector<double> lambda = {4.0, 1.0};
    Allocation a = uniform_alloc(lambda, 2.0, 2);
    CHECK(a.r[0] == Catch::Approx(1.0));
    CHECK(a.r[1] == Catch::Approx(1.0));
    CHECK(a.d[0] == Catch::Approx(4.0));
    CHECK(a.d[1] == Catch::Approx(1.0));
    CHECK(true_distortion(lambda, lambda, a) == Catch::Approx(2.5));

    a = uniform_alloc(lambda, 3.0, 1);
    CHECK(a.r[0] == Catch::Approx(3.0));
    CHECK_FALSE(is_active(a.d[1]));

    a = uniform_alloc(lambda, 0.0, 2);
    CHECK(a.active_count() == 0);

    CHECK_THROWS(uniform_alloc(lambda, 1.0, 0));
    CHECK_THROWS(uniform_alloc(lambda, 1.0, 3));

    CHECK(default_strong_modes(std::vector<double>{1.0, 0.5, 2e-3, 5e-4}) == 3);
    CHECK(default_strong_modes(std::vector<double>{1.0, 0.5, 2e-3, 5e-4}, 0.1) == 2);
}

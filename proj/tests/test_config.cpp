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

#include "csirate/config.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <sstream>

using namespace csirate;

namespace
{
    ExperimentConfig parse(const std::string &text)
    {
        std::istringstream in(text);
        return parse_config(in);
    }

    std::size_t parse_error_line(const std::string &text)
    {
        try
        {
            parse(text);
        }
        catch (const ParseError &e)
        {
            return e.line();
        }
        return 0;
    }
}

TEST_CASE("defaults describe the reference experiment")
{
    const ExperimentConfig cfg;
    CHECK(cfg.antennas == 32);
    CHECK(cfg.subcarriers == 32);
    CHECK(cfg.paths == 6);
    CHECK(cfg.training_length() == 8);
    CHECK(cfg.fixed_rate_bits == 101.0);
    CHECK(cfg.realizations == 50);
    CHECK(cfg.sigma_delta_db == std::vector<double>{0.0, 2.0, 4.0, 6.0, 8.0});
    CHECK_NOTHROW(cfg.validate());

    const std::vector<double> grid = default_rate_grid();
    REQUIRE(grid.size() == 16);
    CHECK(grid.front() == 8.0);
    CHECK(grid.back() == 400.0);
    for (std::size_t i = 1; i < grid.size(); ++i)
        CHECK(grid[i] > grid[i - 1]);
}

TEST_CASE("key-value parsing")
{
    const ExperimentConfig cfg = parse("# comment\n"
                                       "antennas = 8   # trailing\n"
                                       "\n"
                                       "sigma_delta_db = 0, 1.5 3\n"
                                       "rate_grid_bits = 2,4,8\n"
                                       "schemes = rrwf, rwf\n"
                                       "seed = 18446744073709551615\n"
                                       "calibrate_snr = off\n"
                                       "pilot_symbols = 2\n"
                                       "probed_subcarriers = 4\n"
                                       "training_length = 8\n");
    CHECK(cfg.antennas == 8);
    CHECK(cfg.sigma_delta_db == std::vector<double>{0.0, 1.5, 3.0});
    CHECK(cfg.rate_grid_bits == std::vector<double>{2.0, 4.0, 8.0});
    CHECK(cfg.schemes == std::vector<Scheme>{Scheme::rrwf, Scheme::rwf});
    CHECK(cfg.master_seed == 18446744073709551615ULL);
    CHECK_FALSE(cfg.calibrate_snr);
    CHECK(cfg.training_length() == 8);
}

TEST_CASE("malformed configuration reports the line")
{
    CHECK(parse_error_line("antennas = 4\nbogus = 1\n") == 2);
    CHECK(parse_error_line("antennas = 4\n\nantennas = 5\n") == 3);
    CHECK(parse_error_line("antennas = four\n") == 1);
    CHECK(parse_error_line("antennas\n") == 1);
    CHECK(parse_error_line("schemes = rwf, magic\n") == 1);
    CHECK(parse_error_line("pilot_symbols = 1\nprobed_subcarriers = 8\ntraining_length = 6\n") == 3);
}

TEST_CASE("validation rejects out-of-range settings")
{
    ExperimentConfig cfg;
    cfg.rate_grid_bits = {8.0, 4.0};
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = ExperimentConfig();
    cfg.realizations = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = ExperimentConfig();
    cfg.sigma_delta_db = {-1.0};
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = ExperimentConfig();
    cfg.probed_subcarriers = 40;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("describe_config round-trips")
{
    ExperimentConfig cfg;
    cfg.antennas = 16;
    cfg.sigma_delta_db = {0.0, 3.25};
    cfg.rate_grid_bits = {1.0, 10.0, 100.0};
    cfg.schemes = {Scheme::uniform, Scheme::asrwf};
    cfg.master_seed = 77;
    std::string text;
    for (const std::string &line : describe_config(cfg))
        text += line + '\n';
    const ExperimentConfig back = parse(text);
    CHECK(describe_config(back) == describe_config(cfg));
}

TEST_CASE("eigenvalue files")
{
    std::istringstream one("1.0 0.5\n");
    EigenvalueInput in = parse_eigenvalues(one);
    CHECK(in.lambda == std::vector<double>{1.0, 0.5});
    CHECK(in.lambda_dec.empty());

    std::istringstream two("# spectra\n4 1\n\n2 0.25\n");
    in = parse_eigenvalues(two);
    CHECK(in.lambda_dec == std::vector<double>{2.0, 0.25});

    auto line_of = [](const std::string &text) -> std::size_t {
        std::istringstream s(text);
        try
        {
            parse_eigenvalues(s);
        }
        catch (const ParseError &e)
        {
            return e.line();
        }
        return 0;
    };
    CHECK(line_of("1 2\n3 x\n") == 2);
    CHECK(line_of("1 -2\n") == 1);
    CHECK(line_of("1 2\n3\n") == 2);
    CHECK(line_of("1\n2\n3\n") == 3);
    CHECK(line_of("\n") == 1);
}

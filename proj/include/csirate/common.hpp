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

#ifndef csirate_common_H
#define csirate_common_H

#include <Eigen/Dense>

#include <complex>
#include <limits>
#include <stdexcept>
#include <string>

namespace csirate
{
    using cdouble = std::complex<double>;
    using CVector = Eigen::VectorXcd;
    using CMatrix = Eigen::MatrixXcd;

    inline constexpr double kLn2 = 0.69314718055994530942;

    // Test-channel noise variance of a mode that receives no rate.
    inline constexpr double kInactive = std::numeric_limits<double>::infinity();

    inline bool is_active(double d) { return d < kInactive; }

    // Operand shapes do not agree (non-square covariance, wrong pilot length, ...).
    class DimensionError : public std::invalid_argument
    {
    public:
        using std::invalid_argument::invalid_argument;
    };

    // Configuration values outside their documented range.
    class ConfigError : public std::invalid_argument
    {
    public:
        using std::invalid_argument::invalid_argument;
    };

    // Input file could not be parsed; carries the 1-based line number.
    class ParseError : public std::runtime_error
    {
    public:
        ParseError(const std::string &what, std::size_t line)
            : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
        std::size_t line() const { return line_; }

    private:
        std::size_t line_;
    };

    // Every spectral mode was dropped by rank truncation.
    class EmptySpectrumError : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    // Multiplier search failed to meet the rate budget.
    class ConvergenceError : public std::runtime_error
    {
    public:
        ConvergenceError(const std::string &what, double target, double achieved, int iterations)
            : std::runtime_error(what + " (target " + std::to_string(target) + " bits, achieved " +
                                 std::to_string(achieved) + " bits after " + std::to_string(iterations) +
                                 " iterations)"),
              target_(target), achieved_(achieved), iterations_(iterations) {}
        double target() const { return target_; }
        double achieved() const { return achieved_; }
        int iterations() const { return iterations_; }

    private:
        double target_;
        double achieved_;
        int iterations_;
    };

} // namespace csirate

#endif

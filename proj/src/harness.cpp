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

#include "csirate/harness.hpp"
#include "csirate/covmodel.hpp"
#include "csirate/parallel.hpp"
#include "csirate/pilot_mmse.hpp"
#include "csirate/rng.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

namespace csirate
{
    namespace
    {
        constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

        double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

        std::uint64_t stream_seed(const ExperimentConfig &cfg, std::uint64_t tag, int realization)
        {
            return derive_seed(cfg.master_seed, {tag, static_cast<std::uint64_t>(realization)});
        }

        PilotConfig realization_pilots(const ExperimentConfig &cfg, int index, double snr_dl_db)
        {
            return comb_pilot_config(cfg.subcarriers, cfg.pilot_symbols, cfg.probed_subcarriers,
                                     db_to_linear(snr_dl_db), stream_seed(cfg, stream::pilots, index));
        }

        ChannelCovariance realization_prior(const ExperimentConfig &cfg, int index)
        {
            const MultipathParams params =
                sample_multipath_params(cfg.antennas, cfg.subcarriers, cfg.paths,
                                        stream_seed(cfg, stream::multipath, index), cfg.delay_spread);
            return synth_covariance(params);
        }
    } // namespace

    double Realization::floor_db() const { return 10.0 * std::log10(d_mmse / prior_trace); }

    SpectrumPair Realization::mismatched(double sigma_delta_db) const
    {
        SpectrumPair pair = spectrum;
        std::vector<double> delta(z_score.size());
        for (std::size_t i = 0; i < delta.size(); ++i)
            delta[i] = sigma_delta_db * z_score[i];
        pair.lambda_dec = apply_mismatch_db(pair.lambda_true, delta);
        return pair;
    }

    Realization build_realization(const ExperimentConfig &cfg, int index, double snr_dl_db)
    {
        cfg.validate();
        const ChannelCovariance prior = realization_prior(cfg, index);
        const PilotConfig pilots = realization_pilots(cfg, index, snr_dl_db);
        const CMatrix X = build_pilot_matrix(pilots, cfg.antennas, cfg.subcarriers);
        const PosteriorModel post = mmse_posterior(prior, X);

        Realization real;
        real.index = index;
        real.spectrum = truncate_rank(make_matched_pair(eigendecompose_factored(post.factor)), cfg.truncation);
        real.z_score = draw_mismatch_db(real.spectrum.lambda_true.size(),
                                        MismatchSpec{1.0, stream_seed(cfg, stream::mismatch, index)});
        real.estimate_trace = post.estimate_trace();
        real.d_mmse = post.d_mmse;
        real.prior_trace = post.prior_trace;
        return real;
    }

    Allocation allocate(Scheme scheme, const SpectrumPair &spectrum, double rate, const ExperimentConfig &cfg)
    {
        switch (scheme)
        {
        case Scheme::rwf:
            return rwf(spectrum.active_true(), rate);
        case Scheme::rrwf:
            return rrwf(spectrum, rate);
        case Scheme::asrwf:
            return asrwf(spectrum, rate);
        case Scheme::uniform:
            return uniform_alloc(spectrum.active_true(), rate,
                                 default_strong_modes(spectrum.active_true(), cfg.uniform_strong_rel));
        }
        throw ConfigError("unknown scheme");
    }

    std::uint64_t row_seed(std::uint64_t master, int realization, std::size_t sweep_point, Scheme scheme)
    {
        return derive_seed(master, {static_cast<std::uint64_t>(realization), static_cast<std::uint64_t>(sweep_point),
                                    static_cast<std::uint64_t>(scheme)});
    }

    SweepResult run_sweep(const ExperimentConfig &cfg, const std::vector<double> &sigmas,
                          const std::vector<double> &rates, double snr_dl_db, int jobs, const std::string &kind)
    {
        cfg.validate();
        const std::size_t n_real = static_cast<std::size_t>(cfg.realizations);
        const std::size_t n_sigma = sigmas.size();
        const std::size_t n_rate = rates.size();
        const std::size_t n_scheme = cfg.schemes.size();
        auto slot = [&](std::size_t c, std::size_t s, std::size_t k, std::size_t r) {
            return ((c * n_sigma + s) * n_rate + k) * n_real + r;
        };

        SweepResult result;
        result.kind = kind;
        result.snr_dl_db = snr_dl_db;
        result.rows.resize(n_scheme * n_sigma * n_rate * n_real);
        std::vector<double> floor_ratio(n_real, 0.0);
        std::vector<double> estimate_trace(n_real, 0.0);
        std::vector<double> prior_trace(n_real, 0.0);

        parallel_for(n_real, jobs, [&](std::size_t r) {
            const Realization real = build_realization(cfg, static_cast<int>(r), snr_dl_db);
            floor_ratio[r] = real.d_mmse / real.prior_trace;
            estimate_trace[r] = real.estimate_trace;
            prior_trace[r] = real.prior_trace;
            for (std::size_t s = 0; s < n_sigma; ++s)
            {
                const SpectrumPair pair = real.mismatched(sigmas[s]);
                for (std::size_t k = 0; k < n_rate; ++k)
                {
                    for (std::size_t c = 0; c < n_scheme; ++c)
                    {
                        ResultRow &row = result.rows[slot(c, s, k, r)];
                        row.scheme = std::string(to_string(cfg.schemes[c]));
                        row.rate_bits = rates[k];
                        row.sigma_delta_db = sigmas[s];
                        row.realization = static_cast<int>(r);
                        row.seed = row_seed(cfg.master_seed, row.realization, s * n_rate + k, cfg.schemes[c]);
                        row.d_mmse = real.d_mmse;
                        try
                        {
                            const Allocation alloc = allocate(cfg.schemes[c], pair, rates[k], cfg);
                            const DistortionReport rep = evaluate_allocation(pair, alloc, real.estimate_trace,
                                                                             real.d_mmse, real.prior_trace);
                            row.nmse_db = rep.nmse_db;
                            row.nmse_e2e_db = rep.nmse_e2e_db;
                            row.d_quant = rep.d_quant;
                            row.rate_achieved_bits = rep.rate_bits;
                            row.n_active = static_cast<double>(alloc.active_count());
                        }
                        catch (const ConvergenceError &)
                        {
                            row.failed = true;
                            row.nmse_db = row.nmse_e2e_db = row.d_quant = row.rate_achieved_bits = kNaN;
                            row.n_active = kNaN;
                        }
                    }
                }
            }
        });

        double floor_sum = 0.0;
        for (double f : floor_ratio)
            floor_sum += f;
        result.floor_db = 10.0 * std::log10(floor_sum / static_cast<double>(n_real));

        for (std::size_t c = 0; c < n_scheme; ++c)
            for (std::size_t s = 0; s < n_sigma; ++s)
                for (std::size_t k = 0; k < n_rate; ++k)
                {
                    ResultRow avg;
                    avg.scheme = std::string(to_string(cfg.schemes[c])) + "/avg";
                    avg.rate_bits = rates[k];
                    avg.sigma_delta_db = sigmas[s];
                    avg.realization = -1;
                    avg.seed = cfg.master_seed;
                    double nmse = 0.0, e2e = 0.0, dq = 0.0, dm = 0.0, rate = 0.0, active = 0.0;
                    std::size_t used = 0;
                    for (std::size_t r = 0; r < n_real; ++r)
                    {
                        const ResultRow &row = result.rows[slot(c, s, k, r)];
                        if (row.failed)
                        {
                            ++result.failures;
                            continue;
                        }
                        ++used;
                        nmse += row.d_quant / estimate_trace[r];
                        e2e += (row.d_mmse + row.d_quant) / prior_trace[r];
                        dq += row.d_quant;
                        dm += row.d_mmse;
                        rate += row.rate_achieved_bits;
                        active += row.n_active;
                    }
                    if (used == 0)
                    {
                        avg.failed = true;
                        avg.nmse_db = avg.nmse_e2e_db = avg.d_quant = avg.d_mmse = kNaN;
                        avg.rate_achieved_bits = avg.n_active = kNaN;
                    }
                    else
                    {
                        const double n = static_cast<double>(used);
                        avg.nmse_db = 10.0 * std::log10(nmse / n);
                        avg.nmse_e2e_db = 10.0 * std::log10(e2e / n);
                        avg.d_quant = dq / n;
                        avg.d_mmse = dm / n;
                        avg.rate_achieved_bits = rate / n;
                        avg.n_active = active / n;
                    }
                    result.averages.push_back(avg);
                }
        return result;
    }

    SweepResult run_rate_sweep(const ExperimentConfig &cfg, int jobs)
    {
        return run_sweep(cfg, cfg.sigma_delta_db, cfg.rate_grid_bits, cfg.snr_dl_db, jobs, "sweep-rate");
    }

    SweepResult run_mismatch_sweep(const ExperimentConfig &cfg, int jobs)
    {
        return run_sweep(cfg, cfg.sigma_delta_db, {cfg.fixed_rate_bits}, cfg.snr_dl_db, jobs, "sweep-mismatch");
    }

    SweepResult run_e2e_sweep(const ExperimentConfig &cfg, int jobs)
    {
        const double snr = cfg.calibrate_snr ? calibrate_snr(cfg, cfg.floor_target_db, jobs).snr_dl_db : cfg.snr_dl_db;
        return run_sweep(cfg, cfg.sigma_delta_db, cfg.rate_grid_bits, snr, jobs, "sweep-e2e");
    }

    Calibration calibrate_snr(const ExperimentConfig &cfg, double target_db, int jobs)
    {
        cfg.validate();
        const std::size_t n_real = static_cast<std::size_t>(cfg.realizations);
        std::vector<TrainingGram> grams(n_real);
        parallel_for(n_real, jobs, [&](std::size_t r) {
            const ChannelCovariance prior = realization_prior(cfg, static_cast<int>(r));
            const PilotConfig pilots = realization_pilots(cfg, static_cast<int>(r), 0.0);
            grams[r] = training_gram(prior, build_unit_pilot_matrix(pilots, cfg.antennas, cfg.subcarriers),
                                     cfg.antennas);
        });

        auto floor_at = [&](double snr_db) {
            double sum = 0.0;
            for (const TrainingGram &g : grams)
                sum += g.d_mmse(db_to_linear(snr_db)) / g.prior_trace;
            return 10.0 * std::log10(sum / static_cast<double>(n_real));
        };

        // The floor falls monotonically with snr; widen the bracket, then bisect in dB.
        double lo = -20.0;
        double hi = 60.0;
        Calibration cal;
        while (floor_at(lo) < target_db)
        {
            lo -= 40.0;
            if (lo < -200.0)
                throw ConfigError("floor target " + format_number(target_db) + " dB lies above the untrained floor");
        }
        while (floor_at(hi) > target_db)
        {
            hi += 40.0;
            if (hi > 300.0)
                throw ConfigError("floor target " + format_number(target_db) + " dB is not reachable by training");
        }
        for (cal.iterations = 1; cal.iterations <= 200; ++cal.iterations)
        {
            const double mid = 0.5 * (lo + hi);
            const double f = floor_at(mid);
            if (std::abs(f - target_db) <= 1e-10 || hi - lo <= 1e-12)
            {
                lo = hi = mid;
                break;
            }
            if (f > target_db)
                lo = mid;
            else
                hi = mid;
        }
        cal.snr_dl_db = 0.5 * (lo + hi);
        cal.floor_db = floor_at(cal.snr_dl_db);
        return cal;
    }

    std::string format_number(double value)
    {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.12g", value);
        return buf;
    }

    void write_csv(std::ostream &out, const SweepResult &result, const ExperimentConfig &cfg, char separator)
    {
        out << "# csirate " << kToolVersion << ' ' << result.kind << '\n';
        for (const std::string &line : describe_config(cfg))
            out << "# " << line << '\n';
        out << "# snr_dl_db_used = " << format_number(result.snr_dl_db) << '\n';
        out << "# mmse_floor_db = " << format_number(result.floor_db) << '\n';
        out << "# failed_rows = " << result.failures << '\n';

        std::string header = kCsvHeader;
        for (char &ch : header)
            if (ch == ',')
                ch = separator;
        out << header << '\n';

        auto emit = [&](const ResultRow &row) {
            const char sep = separator;
            out << row.scheme << sep << format_number(row.rate_bits) << sep << format_number(row.sigma_delta_db) << sep
                << row.realization << sep << row.seed << sep << format_number(row.nmse_db) << sep
                << format_number(row.nmse_e2e_db) << sep << format_number(row.d_quant) << sep
                << format_number(row.d_mmse) << sep << format_number(row.rate_achieved_bits) << sep
                << format_number(row.n_active) << '\n';
        };
        for (const ResultRow &row : result.rows)
            emit(row);
        for (const ResultRow &row : result.averages)
            emit(row);
    }

} // namespace csirate

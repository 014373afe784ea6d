// Copyright 2026 The annealscale Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "annealscale/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <memory>
#include <numeric>
#include <set>
#include <sstream>
#include <utility>

#include "annealscale/digest.hpp"
#include "annealscale/error.hpp"
#include "annealscale/parallel.hpp"

namespace annealscale {

NoisePlacement parse_noise_placement(const std::string& name) {
    if (name == "none") return NoisePlacement::none;
    if (name == "all-sites") return NoisePlacement::all_sites;
    if (name == "single-site") return NoisePlacement::single_site;
    throw ParameterError("unknown noise mode '" + name +
                         "' (expected none, all-sites or single-site)");
}

const char* to_string(NoisePlacement placement) {
    switch (placement) {
        case NoisePlacement::none:
            return "none";
        case NoisePlacement::all_sites:
            return "all-sites";
        case NoisePlacement::single_site:
            return "single-site";
    }
    return "?";
}

const std::vector<double>& SweepPlan::grid(std::size_t L) const {
    const auto it = size_velocities.find(L);
    return it == size_velocities.end() ? velocities : it->second;
}

void SweepPlan::validate() const {
    if (sizes.empty()) throw ParameterError("sweep needs at least one chain length");
    for (std::size_t L : sizes) {
        if (L < 2) throw ParameterError("chain length must be at least 2");
        const auto& v = grid(L);
        if (v.empty()) throw ParameterError("no velocities for L=" + std::to_string(L));
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!(v[i] > 0.0) || !std::isfinite(v[i])) {
                throw ParameterError("velocities must be positive and finite");
            }
            if (i > 0 && !(v[i] > v[i - 1])) {
                throw ParameterError("velocities must be strictly increasing");
            }
        }
        if (noise == NoisePlacement::single_site && noise_site >= L) {
            throw ParameterError("noise site outside a chain of length " + std::to_string(L));
        }
    }
    if (n_realizations < 1) throw ParameterError("need at least one realization");
    if (noise != NoisePlacement::none && n_realizations < 100) {
        throw ParameterError("a noisy sweep needs at least 100 realizations per point");
    }
    if (n_bins < 1) throw ParameterError("need at least one bin");
    if (n_realizations >= 100 && n_bins < 10) {
        throw ParameterError("use at least 10 bins for 100 or more realizations");
    }
    if (noise != NoisePlacement::none) spectrum.validate();
    stepper.options.validate();
}

std::string canonical_text(const SweepPlan& plan) {
    std::ostringstream out;
    auto line = [&](const char* key, const std::string& value) {
        out << key << ": " << value << '\n';
    };
    const bool noisy = plan.noise != NoisePlacement::none;
    line("noise", to_string(plan.noise));
    if (plan.noise == NoisePlacement::single_site) line("noise_site", std::to_string(plan.noise_site));
    if (noisy) {
        line("exponent", format_double(plan.spectrum.exponent));
        line("cutoff", format_double(plan.spectrum.cutoff));
        line("coupling", format_double(plan.spectrum.coupling));
        line("n_modes", std::to_string(plan.spectrum.n_modes));
        line("n_realizations", std::to_string(plan.n_realizations));
        line("n_bins", std::to_string(plan.n_bins));
        line("master_seed", std::to_string(plan.master_seed));
    }
    line("bond_power", format_double(plan.schedule.bond_power));
    line("field_power", format_double(plan.schedule.field_power));
    if (plan.schedule.frozen_s) line("frozen_s", format_double(*plan.schedule.frozen_s));
    line("method", to_string(plan.stepper.method));
    line("rtol", format_double(plan.stepper.options.rtol));
    line("atol", format_double(plan.stepper.options.atol));
    line("initial_step", format_double(plan.stepper.options.initial_step));
    line("max_step", format_double(plan.stepper.options.max_step));
    line("min_step", format_double(plan.stepper.options.min_step));
    line("max_steps", std::to_string(plan.stepper.options.max_steps));
    return out.str();
}

std::string plan_digest(const SweepPlan& plan) { return sha256_hex(canonical_text(plan)); }

std::vector<double> default_velocity_grid(std::size_t L, std::size_t points) {
    if (points < 2) throw ParameterError("a velocity grid needs at least two points");
    // four decades; the upper end sits at the sudden-quench plateau and both
    // ends slide down by a decade per factor ~10 in L
    const double shift = std::log10(static_cast<double>(L) / 32.0);
    const double hi = 0.0 - 0.5 * shift;
    const double lo = hi - 4.0;
    std::vector<double> grid(points);
    for (std::size_t k = 0; k < points; ++k) {
        grid[k] = std::pow(10.0, lo + (hi - lo) * static_cast<double>(k) / (points - 1));
    }
    return grid;
}

BinnedMean binned_mean(std::span<const double> samples, std::size_t n_bins) {
    BinnedMean out;
    const std::size_t n = samples.size();
    if (n == 0) throw ParameterError("binned mean of no samples");
    out.mean = std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(n);
    const std::size_t bins = std::min(std::max<std::size_t>(n_bins, 1), n);
    out.n_bins = bins;
    if (bins < 2) {
        out.stderr_ = std::nan("");
        return out;
    }
    const std::size_t width = n / bins;
    std::vector<double> means(bins);
    for (std::size_t b = 0; b < bins; ++b) {
        const auto first = samples.begin() + static_cast<std::ptrdiff_t>(b * width);
        means[b] = std::accumulate(first, first + static_cast<std::ptrdiff_t>(width), 0.0) /
                   static_cast<double>(width);
    }
    const double m = std::accumulate(means.begin(), means.end(), 0.0) / static_cast<double>(bins);
    double ss = 0.0;
    for (double x : means) ss += (x - m) * (x - m);
    out.stderr_ = std::sqrt(ss / static_cast<double>(bins - 1)) / std::sqrt(static_cast<double>(bins));
    return out;
}

std::uint64_t realization_seed(std::uint64_t master, std::size_t L, double v, std::size_t r,
                               std::size_t site) {
    return derive_seed(master, {static_cast<std::uint64_t>(L), seed_tag(v),
                                static_cast<std::uint64_t>(r), static_cast<std::uint64_t>(site)});
}

ChainSpec realization_chain(std::size_t L, double v, std::size_t r, const SweepPlan& plan) {
    ChainSpec chain(L, plan.schedule);
    auto attach = [&](std::size_t site) {
        const auto seed = realization_seed(plan.master_seed, L, v, r, site);
        chain.attach_noise(site, std::make_shared<NoiseSignal>(sample_signal(plan.spectrum, seed)),
                           plan.spectrum.coupling);
    };
    if (plan.noise == NoisePlacement::all_sites) {
        for (std::size_t i = 0; i < L; ++i) attach(i);
    } else if (plan.noise == NoisePlacement::single_site) {
        attach(plan.noise_site);
    }
    return chain;
}

double run_realization(std::size_t L, double v, std::size_t r, const SweepPlan& plan) {
    const double T = 1.0 / v;
    const ChainSpec chain = realization_chain(L, v, r, plan);
    const auto m = bdg_matrices(chain, 0.0, 0.0);
    BdgEvolver evolver(ground_state(m.A, m.B), chain, T, plan.stepper);
    try {
        evolver.advance_to(T);
    } catch (const IntegrationError& e) {
        std::ostringstream msg;
        msg << "L=" << L << " v=" << format_double(v) << " realization " << r << ": " << e.what();
        throw IntegrationError(msg.str(), e.time(), e.error_estimate());
    }
    return evolver.residual_energy();
}

CurveRow PointResult::row() const {
    CurveRow r;
    r.L = L;
    r.v = v;
    r.delta_e_mean = energy.mean;
    r.delta_e_stderr = energy.stderr_;
    r.n_real = samples.size();
    r.n_bins = energy.n_bins;
    return r;
}

PointResult run_point(std::size_t L, double v, const SweepPlan& plan) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ParameterError("velocity must be positive");
    const std::size_t count = plan.noise == NoisePlacement::none ? 1 : plan.n_realizations;
    PointResult result;
    result.L = L;
    result.v = v;
    result.samples.assign(count, 0.0);
    parallel_for(count, plan.workers,
                 [&](std::size_t r) { result.samples[r] = run_realization(L, v, r, plan); });
    if (plan.noise == NoisePlacement::none) {
        result.energy = {result.samples[0], 0.0, 1};
    } else {
        result.energy = binned_mean(result.samples, plan.n_bins);
    }
    return result;
}

SweepOutcome run_sweep(const SweepPlan& plan, const SweepOutput& output) {
    plan.validate();
    SweepOutcome outcome;
    outcome.table.header.schema = "ensemble";
    outcome.table.header.config_digest = output.config_digest;
    outcome.table.header.notes = output.notes;

    std::set<std::pair<std::size_t, double>> done;
    bool append = false;
    if (!output.path.empty() && output.resume && std::filesystem::exists(output.path) &&
        std::filesystem::file_size(output.path) > 0) {
        const CurveTable previous = read_curve_table(output.path);
        if (previous.header.config_digest != output.config_digest) {
            throw Error("'" + output.path +
                        "' was produced by a different configuration; refusing to resume");
        }
        for (const auto& row : previous.rows) {
            if (done.insert({row.L, row.v}).second) outcome.table.rows.push_back(row);
        }
        outcome.reused = outcome.table.rows.size();
        append = true;
    }

    std::unique_ptr<CurveTableWriter> writer;
    if (!output.path.empty()) {
        writer = std::make_unique<CurveTableWriter>(output.path, outcome.table.header, append);
    }

    for (std::size_t L : plan.sizes) {
        for (double v : plan.grid(L)) {
            if (done.count({L, v})) continue;
            try {
                const CurveRow row = run_point(L, v, plan).row();
                if (writer) writer->write(row);
                if (output.on_row) output.on_row(row);
                outcome.table.rows.push_back(row);
                ++outcome.computed;
            } catch (const IntegrationError& e) {
                FailedPoint failure{L, v, e.what()};
                if (writer) writer->write_failure(failure);
                outcome.failures.push_back(failure);
            }
        }
    }
    outcome.table.failures = outcome.failures;
    std::sort(outcome.table.rows.begin(), outcome.table.rows.end(),
              [](const CurveRow& a, const CurveRow& b) {
                  return a.L != b.L ? a.L < b.L : a.v < b.v;
              });
    return outcome;
}

}  // namespace annealscale

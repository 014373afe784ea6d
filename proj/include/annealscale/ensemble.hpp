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

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "annealscale/bdg.hpp"
#include "annealscale/chain.hpp"
#include "annealscale/noise.hpp"
#include "annealscale/table.hpp"

namespace annealscale {

enum class NoisePlacement {
    none,
    all_sites,
    single_site,
};

NoisePlacement parse_noise_placement(const std::string& name);
const char* to_string(NoisePlacement placement);

/// A grid of anneals over chain lengths and velocities (T = 1 / v).
struct SweepPlan {
    std::vector<std::size_t> sizes;
    /// Grid used for every size without an entry in `size_velocities`.
    std::vector<double> velocities;
    std::map<std::size_t, std::vector<double>> size_velocities;
    std::size_t n_realizations = 200;
    NoisePlacement noise = NoisePlacement::all_sites;
    std::size_t noise_site = 0;  // for single_site
    NoiseSpectrum spectrum;
    Schedule schedule;
    BdgStepper stepper = default_bdg_stepper();
    std::uint64_t master_seed = 1;
    std::size_t n_bins = 20;
    std::size_t workers = 0;  // 0: one per hardware thread

    const std::vector<double>& grid(std::size_t L) const;
    void validate() const;
};

/// Every setting that changes the numbers in a result row, one `key: value`
/// per line. The grid and the worker count are left out, so a table can be
/// extended with new points and resumed on a different machine.
std::string canonical_text(const SweepPlan& plan);

/// SHA-256 of canonical_text; the digest written into result tables.
std::string plan_digest(const SweepPlan& plan);

/// `points` log-spaced velocities whose window moves to lower v as L grows.
std::vector<double> default_velocity_grid(std::size_t L, std::size_t points = 20);

struct BinnedMean {
    double mean = 0.0;
    double stderr_ = 0.0;  // NaN when fewer than two bins
    std::size_t n_bins = 0;
};

/// Mean of all samples; error from `n_bins` equal consecutive bins as
/// std(bin means) / sqrt(n_bins). When the count is not a multiple of the bin
/// count, the trailing remainder enters the mean but not the error bar.
BinnedMean binned_mean(std::span<const double> samples, std::size_t n_bins);

/// Seed of the noise signal on `site` in realization `r` of point (L, v).
std::uint64_t realization_seed(std::uint64_t master, std::size_t L, double v, std::size_t r,
                               std::size_t site);

/// The chain of realization r, with its noise signals attached.
ChainSpec realization_chain(std::size_t L, double v, std::size_t r, const SweepPlan& plan);

/// Residual energy after one anneal of realization r.
double run_realization(std::size_t L, double v, std::size_t r, const SweepPlan& plan);

struct PointResult {
    std::size_t L = 0;
    double v = 0.0;
    BinnedMean energy;
    std::vector<double> samples;  // per realization, in realization order

    CurveRow row() const;
};

/// All realizations of one grid point. A noise-free plan runs one realization.
/// Integration failures are rethrown as IntegrationError naming (L, v, r).
PointResult run_point(std::size_t L, double v, const SweepPlan& plan);

struct SweepOutput {
    std::string path;            // empty: keep results in memory only
    std::string config_digest;
    std::vector<std::string> notes;
    bool resume = true;          // skip points already present in `path`
    std::function<void(const CurveRow&)> on_row;
};

struct SweepOutcome {
    CurveTable table;  // every completed row, sorted by (L, v)
    std::size_t computed = 0;
    std::size_t reused = 0;
    std::vector<FailedPoint> failures;
};

/// Runs every grid point, appending each completed row to `output.path` as
/// soon as it is known. A failed point is recorded and the sweep continues.
SweepOutcome run_sweep(const SweepPlan& plan, const SweepOutput& output = {});

}  // namespace annealscale

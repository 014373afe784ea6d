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

// Run configuration. A YAML document with optional top-level keys
//
//   master_seed, output_dir, workers
//   simulate:  sizes, velocities | grid_points, realizations, bins, noise,
//              noise_site, spectrum {lambda, p, omega0, modes},
//              schedule {bond_power, field_power}, integrator {method, rtol, atol},
//              output, resume
//   qubit:     h_z, spectrum, t_max, dt_out, realizations, rtol, atol, split, output
//   fit, collapse: input, observable, sizes, v_min, v_max, plateau_fraction,
//              max_iterations, tolerance, output
//   kzm:       d, z, nu, kappa
//   embed:     L, J_ising, J_hc, broken_qubits, broken_couplers, gauge, gauge_seed, output
//   decode:    samples, couplers, annealing_time, vacancy_threshold, output
//              (without `couplers` the embed section describes the embedding)
//   aggregate: input, variant, bins, output
//   oracle:    sizes, cases, T, spectrum, tolerance
//
// Unknown keys are errors. Overrides "path.to.key=value" take YAML values and
// are applied before validation.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "annealscale/chimera.hpp"
#include "annealscale/ensemble.hpp"
#include "annealscale/error.hpp"
#include "annealscale/qubit.hpp"
#include "annealscale/samples.hpp"
#include "annealscale/scalefit.hpp"

namespace annealscale {

class ConfigError : public Error {
  public:
    using Error::Error;
};

struct SimulateConfig {
    SweepPlan plan;
    std::size_t grid_points = 20;  // used when no velocities are given
    std::string output = "sweep.csv";
    bool resume = true;
};

struct QubitConfig {
    QubitRun run;
    bool split = false;
    std::string output = "purity.csv";
};

struct FitConfig {
    std::string input;
    Observable observable = Observable::energy;
    std::vector<std::size_t> sizes;  // empty: every size in the table
    PointSelection selection;
    FitOptions options;
    std::string output = "fit";
};

struct EmbedConfig {
    int L = 32;
    double J_ising = chimera::default_J_ising;
    double J_hc = chimera::default_J_hc;
    chimera::DefectList defects;
    std::string gauge = "none";  // none | checkerboard | random
    std::uint64_t gauge_seed = 1;
    std::string output = "embedding";
};

struct DecodeConfig {
    std::string samples;
    std::string couplers;
    std::optional<double> annealing_time;
    chimera::DecodeOptions options;
    std::string output = "tiles.csv";
};

struct AggregateConfig {
    std::string input;
    chimera::DecodeVariant variant = chimera::DecodeVariant::physical;
    std::size_t bins = 20;
    std::string output = "curve.csv";
};

struct OracleConfig {
    std::vector<std::size_t> sizes = {2, 3, 4, 5, 6, 7, 8};
    std::size_t cases = 3;
    double T = 10.0;
    NoiseSpectrum spectrum;
    double tolerance = 1e-5;
};

struct RunConfig {
    std::uint64_t master_seed = 1;
    std::string output_dir = ".";
    std::size_t workers = 0;

    SimulateConfig simulate;
    QubitConfig qubit;
    FitConfig fit;
    FitConfig collapse;
    KzmInput kzm;
    EmbedConfig embed;
    DecodeConfig decode;
    AggregateConfig aggregate;
    OracleConfig oracle;

    std::string canonical;  // sorted, normalized form of the merged document
    std::string digest;     // SHA-256 of `canonical`
};

/// Parses `text`, applies the overrides in order, validates, and fills in
/// seeds and worker counts for every section.
RunConfig load_config(const std::string& text, const std::string& source = "<config>",
                      const std::vector<std::string>& overrides = {});
RunConfig load_config_file(const std::string& path, const std::vector<std::string>& overrides = {});

/// ANNEALSCALE_WORKERS and ANNEALSCALE_OUTPUT_DIR, when set, replace the
/// configured values. Neither enters the digest.
void apply_environment(RunConfig& config);

std::string tool_version();

}  // namespace annealscale

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

// Measurement records of the full Chimera graph and their reduction to
// per-tile residual energies and magnetization deficits.
//
// Text samples: one run per line, 2048 values in {-1, 1} separated by blanks
// or commas; run metadata lives in a JSON sidecar "<file>.json":
//
//   {"format": "annealscale-samples", "version": 1, "n_qubits": 2048,
//    "runs": [{"annealing_time": 20.0, "timestamp": "..."}, ...]}
//
// Binary samples (little-endian):
//
//   "ASMP" | u32 version = 1 | u32 n_qubits | u64 n_runs |
//   n_runs x ( f64 annealing_time | u32 len | len bytes timestamp |
//              n_qubits x i8 spin )

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "annealscale/chimera.hpp"
#include "annealscale/table.hpp"

namespace annealscale::chimera {

struct RunMetadata {
    double annealing_time = 0.0;
    std::string timestamp;
};

struct SampleSet {
    std::vector<std::vector<std::int8_t>> records;
    std::vector<RunMetadata> runs;  // one per record

    /// Throws FormatError unless every record has 2048 values in {-1, 1}.
    void validate() const;
};

std::string sidecar_path(const std::string& samples_path);

/// Writes `path` and its sidecar.
void write_samples_text(const std::string& path, const SampleSet& samples);
/// Reads `path` and its sidecar; without a sidecar every run gets
/// `annealing_time`, and FormatError is raised when that is unset too.
SampleSet read_samples_text(const std::string& path,
                            std::optional<double> annealing_time = std::nullopt);

void write_samples_binary(const std::string& path, const SampleSet& samples);
SampleSet read_samples_binary(const std::string& path);

/// Dispatches on the "ASMP" magic.
SampleSet read_samples(const std::string& path,
                       std::optional<double> annealing_time = std::nullopt);

struct DecodeOptions {
    double vacancy_threshold = 0.05;  // tiles with a larger vacancy fraction are excluded
};

/// Per tile and run. Energies are in units of one broken lattice bond
/// (2 J_ising), magnetization deficits in spins.
struct TileRecord {
    int tile = 0;
    std::size_t run = 0;
    int L = 0;
    double annealing_time = 0.0;
    double delta_e_physical = 0.0;
    double delta_m_physical = 0.0;
    double delta_e_logical = 0.0;
    double delta_m_logical = 0.0;
    int hc_violations = 0;
    int vacancies = 0;
    bool excluded = false;
};

/// Physical values use the embedded Ising couplers and all 2 N qubits of the
/// N intact sites; logical values take each pair's shore 0..3 qubit (the lower
/// index) as the site spin. Gauges are undone before the magnetization.
std::vector<TileRecord> decode_samples(const SampleSet& samples, const Embedding& embedding,
                                       const DecodeOptions& options = {});

void write_tile_table(std::ostream& out, const std::vector<TileRecord>& records);
std::vector<TileRecord> parse_tile_table(std::istream& in, const std::string& source = "<tiles>");

enum class DecodeVariant { physical, logical };
DecodeVariant parse_decode_variant(const std::string& name);

/// Means over included tile-runs for every (L, annealing time), with v =
/// 1 / annealing_time, in the result-table schema.
CurveTable aggregate_tiles(const std::vector<TileRecord>& records,
                           DecodeVariant variant = DecodeVariant::physical, std::size_t n_bins = 20);

/// Independent logical defects: each intact site is down with probability
/// `flip`, and the shore 4..7 qubit of a pair disagrees with probability
/// `hc_violation`. Unused qubits read +1; gauges are applied.
struct BernoulliDefects {
    double flip = 0.0;
    double hc_violation = 0.0;
};

SampleSet synthetic_samples(const Embedding& embedding, const BernoulliDefects& model,
                            std::size_t runs, double annealing_time, std::uint64_t seed);

/// E[N - |sum s|] for N independent spins that are down with probability q.
double expected_delta_m(std::size_t n_spins, double q);

/// E[broken bonds] = n_bonds 2 q (1 - q).
double expected_delta_e(std::size_t n_bonds, double q);

}  // namespace annealscale::chimera

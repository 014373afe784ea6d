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

// Chimera C16 topology and the embedding of open L x L ferromagnets.
//
// Qubit q = 8 (16 row + col) + k. Shore k = 0..3 couples to the same k in
// the cell below, shore k = 4..7 to the same k in the cell to the right. A
// logical site is the pair (j, j + 4) of one cell; every cell holds a 2 x 2
// block of the 32 x 32 logical grid.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace annealscale::chimera {

inline constexpr int cell_rows = 16;
inline constexpr int cell_cols = 16;
inline constexpr int shore = 4;
inline constexpr int qubits_per_cell = 2 * shore;
inline constexpr int n_qubits = cell_rows * cell_cols * qubits_per_cell;
inline constexpr int grid_side = 2 * cell_rows;  // logical sites per axis

using Qubit = std::uint32_t;

constexpr Qubit qubit(int row, int col, int k) {
    return static_cast<Qubit>(qubits_per_cell * (cell_cols * row + col) + k);
}

struct QubitCoordinates {
    int row, col, k;
};
QubitCoordinates coordinates(Qubit q);

/// Unordered physical link, stored with first < second.
using Edge = std::pair<Qubit, Qubit>;
Edge make_edge(Qubit a, Qubit b);

/// Every coupler of the full graph, sorted.
std::vector<Edge> topology_edges();
bool is_edge(Qubit a, Qubit b);

struct DefectList {
    std::vector<Qubit> qubits;
    std::vector<Edge> couplers;

    /// Throws ParameterError for indices outside the topology.
    void validate() const;
    bool broken(Qubit q) const;
    bool broken(const Edge& e) const;
};

enum class CouplerKind : std::uint8_t { high_cost, intra_cell, inter_cell };

struct Coupler {
    Qubit q1 = 0;
    Qubit q2 = 0;
    double J = 0.0;
    CouplerKind kind = CouplerKind::intra_cell;

    bool operator==(const Coupler&) const = default;
};

/// Placement of the 2 x 2 logical block inside a cell: the pair index j at
/// local position (lx, ly) is base[ly][lx] with x and/or y mirrored. Cells in
/// odd columns are the mirror image in x ("B") of their left neighbour ("A");
/// odd rows add a mirror in y (written with a trailing ').
struct Arrangement {
    bool mirror_x = false;
    bool mirror_y = false;

    int pair_at(int lx, int ly) const;
    std::string label() const;
};
Arrangement arrangement(int row, int col);

struct TilePlacement {
    int id = 0;
    int x0 = 0;
    int y0 = 0;
    int side = 0;
};

/// Tiles of side L on the 32 x 32 grid: floor(32/L)^2 of them when L <= 16,
/// otherwise one tile at the origin.
std::vector<TilePlacement> tile_partition(int L, std::vector<std::string>* notes = nullptr);

struct LogicalSite {
    int x = 0;
    int y = 0;
    Qubit a = 0;  // shore 0..3 member, the lower index
    Qubit b = 0;  // shore 4..7 member
    int tile = -1;  // -1: outside every tile
    bool vacancy = false;
    int gauge = 1;

    bool active() const { return tile >= 0 && !vacancy; }
};

/// A lattice bond and the couplers that realize it.
struct Bond {
    int site1 = 0;  // indices into Embedding::sites
    int site2 = 0;
    std::vector<std::size_t> couplers;  // indices into Embedding::couplers
};

struct Embedding {
    int L = 0;
    double J_ising = 0.5;
    double J_hc = 1.0;
    DefectList defects;
    std::vector<TilePlacement> tiles;
    std::vector<LogicalSite> sites;  // grid_side^2, index y * grid_side + x
    std::vector<Coupler> couplers;   // sorted by (q1, q2), each edge at most once
    std::vector<Bond> bonds;         // between active sites only
    std::vector<std::string> notes;

    const LogicalSite& site(int x, int y) const { return sites[y * grid_side + x]; }
    /// Site index owning physical qubit q, or -1.
    int site_of(Qubit q) const;
    std::size_t count(CouplerKind kind) const;

    std::vector<int> qubit_site;  // per physical qubit: owning tile site or -1
};

inline constexpr double default_J_ising = 0.5;
inline constexpr double default_J_hc = 1.0;

/// Ferromagnetic L x L tiles (couplers are negative). Sites whose qubits or
/// used couplers are broken become vacancies with no couplers at all.
Embedding build_embedding(int L, double J_ising = default_J_ising, const DefectList& defects = {},
                          double J_hc = default_J_hc);

/// J -> J g_i g_j on Ising couplers for g given per grid site (index
/// y * 32 + x). High-cost couplers are unchanged.
Embedding gauge_transform(const Embedding& embedding, const std::vector<int>& gauge);

/// Classical energy sum_c J_c s_q1 s_q2 over the couplers, optionally without
/// the high-cost ones. `spins` holds +-1 for all 2048 qubits.
double classical_energy(const Embedding& embedding, const std::vector<std::int8_t>& spins,
                        bool include_high_cost = true);

/// Text form: versioned header, the construction parameters, then one
/// "q1 q2 J" line per coupler.
void write_coupler_list(std::ostream& out, const Embedding& embedding);
std::string coupler_list_text(const Embedding& embedding);

/// Rebuilds the embedding from the header and checks that the listed
/// couplers are exactly the ones it implies; FormatError otherwise.
Embedding parse_coupler_list(std::istream& in, const std::string& source = "<couplers>");
Embedding read_coupler_list(const std::string& path);

}  // namespace annealscale::chimera

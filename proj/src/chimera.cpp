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

#include "annealscale/chimera.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include "annealscale/error.hpp"
#include "annealscale/table.hpp"

namespace annealscale::chimera {

namespace {

constexpr int base_pairs[2][2] = {{0, 1}, {2, 3}};

void check_qubit(Qubit q) {
    if (q >= static_cast<Qubit>(n_qubits)) {
        throw ParameterError("qubit " + std::to_string(q) + " outside the Chimera graph");
    }
}

int site_index(int x, int y) { return y * grid_side + x; }

}  // namespace

QubitCoordinates coordinates(Qubit q) {
    check_qubit(q);
    const int cell = static_cast<int>(q) / qubits_per_cell;
    return {cell / cell_cols, cell % cell_cols, static_cast<int>(q) % qubits_per_cell};
}

Edge make_edge(Qubit a, Qubit b) { return a < b ? Edge{a, b} : Edge{b, a}; }

bool is_edge(Qubit a, Qubit b) {
    if (a == b) return false;
    const auto p = coordinates(a), r = coordinates(b);
    if (p.row == r.row && p.col == r.col) return (p.k < shore) != (r.k < shore);
    if (p.k != r.k) return false;
    if (p.k < shore) return p.col == r.col && std::abs(p.row - r.row) == 1;
    return p.row == r.row && std::abs(p.col - r.col) == 1;
}

std::vector<Edge> topology_edges() {
    std::vector<Edge> edges;
    for (int row = 0; row < cell_rows; ++row) {
        for (int col = 0; col < cell_cols; ++col) {
            for (int i = 0; i < shore; ++i) {
                for (int j = shore; j < qubits_per_cell; ++j) {
                    edges.push_back(make_edge(qubit(row, col, i), qubit(row, col, j)));
                }
                if (row + 1 < cell_rows) {
                    edges.push_back(make_edge(qubit(row, col, i), qubit(row + 1, col, i)));
                }
            }
            for (int j = shore; j < qubits_per_cell; ++j) {
                if (col + 1 < cell_cols) {
                    edges.push_back(make_edge(qubit(row, col, j), qubit(row, col + 1, j)));
                }
            }
        }
    }
    std::sort(edges.begin(), edges.end());
    return edges;
}

void DefectList::validate() const {
    for (Qubit q : qubits) check_qubit(q);
    for (const auto& [a, b] : couplers) {
        check_qubit(a);
        check_qubit(b);
        if (!is_edge(a, b)) {
            throw ParameterError("broken coupler " + std::to_string(a) + "-" + std::to_string(b) +
                                 " is not an edge of the Chimera graph");
        }
    }
}

bool DefectList::broken(Qubit q) const {
    return std::find(qubits.begin(), qubits.end(), q) != qubits.end();
}

bool DefectList::broken(const Edge& e) const {
    const Edge n = make_edge(e.first, e.second);
    for (const auto& c : couplers) {
        if (make_edge(c.first, c.second) == n) return true;
    }
    return false;
}

int Arrangement::pair_at(int lx, int ly) const {
    return base_pairs[mirror_y ? 1 - ly : ly][mirror_x ? 1 - lx : lx];
}

std::string Arrangement::label() const {
    return std::string(mirror_x ? "B" : "A") + (mirror_y ? "'" : "");
}

Arrangement arrangement(int row, int col) { return {col % 2 == 1, row % 2 == 1}; }

std::vector<TilePlacement> tile_partition(int L, std::vector<std::string>* notes) {
    if (L < 2 || L > grid_side) {
        throw ParameterError("tile side must lie in [2, " + std::to_string(grid_side) + "]");
    }
    std::vector<TilePlacement> tiles;
    if (L > grid_side / 2) {
        if (notes && L < grid_side) {
            notes->push_back("L=" + std::to_string(L) +
                             " does not allow several tiles; using a single tile");
        }
        tiles.push_back({0, 0, 0, L});
        return tiles;
    }
    const int per_axis = grid_side / L;
    for (int ty = 0; ty < per_axis; ++ty) {
        for (int tx = 0; tx < per_axis; ++tx) {
            tiles.push_back({ty * per_axis + tx, tx * L, ty * L, L});
        }
    }
    return tiles;
}

int Embedding::site_of(Qubit q) const {
    check_qubit(q);
    return qubit_site[q];
}

std::size_t Embedding::count(CouplerKind kind) const {
    return static_cast<std::size_t>(std::count_if(
            couplers.begin(), couplers.end(), [&](const Coupler& c) { return c.kind == kind; }));
}

Embedding build_embedding(int L, double J_ising, const DefectList& defects, double J_hc) {
    if (!(J_ising > 0.0 && J_ising <= 1.0)) throw ParameterError("J_ising must lie in (0, 1]");
    if (!(J_hc > 0.0 && J_hc <= 1.0)) throw ParameterError("J_hc must lie in (0, 1]");
    defects.validate();

    Embedding e;
    e.L = L;
    e.J_ising = J_ising;
    e.J_hc = J_hc;
    e.defects = defects;
    e.tiles = tile_partition(L, &e.notes);
    e.sites.resize(grid_side * grid_side);
    e.qubit_site.assign(n_qubits, -1);

    for (int y = 0; y < grid_side; ++y) {
        for (int x = 0; x < grid_side; ++x) {
            const int row = y / 2, col = x / 2;
            const int j = arrangement(row, col).pair_at(x % 2, y % 2);
            auto& s = e.sites[site_index(x, y)];
            s.x = x;
            s.y = y;
            s.a = qubit(row, col, j);
            s.b = qubit(row, col, j + shore);
        }
    }
    for (const auto& t : e.tiles) {
        for (int y = t.y0; y < t.y0 + t.side; ++y) {
            for (int x = t.x0; x < t.x0 + t.side; ++x) e.sites[site_index(x, y)].tile = t.id;
        }
    }

    // couplers of the bond between two sites, in the order (a-side, b-side)
    struct Candidate {
        int s1, s2;
        std::vector<Coupler> couplers;
    };
    std::vector<Candidate> candidates;
    auto bond_couplers = [&](const LogicalSite& p, const LogicalSite& r) {
        std::vector<Coupler> out;
        if (p.x / 2 == r.x / 2 && p.y / 2 == r.y / 2) {
            for (const auto& [q1, q2] : {make_edge(p.a, r.b), make_edge(r.a, p.b)}) {
                out.push_back({q1, q2, -0.5 * J_ising, CouplerKind::intra_cell});
            }
        } else if (p.y == r.y) {
            const auto [q1, q2] = make_edge(p.b, r.b);
            out.push_back({q1, q2, -J_ising, CouplerKind::inter_cell});
        } else {
            const auto [q1, q2] = make_edge(p.a, r.a);
            out.push_back({q1, q2, -J_ising, CouplerKind::inter_cell});
        }
        return out;
    };
    for (int y = 0; y < grid_side; ++y) {
        for (int x = 0; x < grid_side; ++x) {
            const auto& s = e.sites[site_index(x, y)];
            if (s.tile < 0) continue;
            for (const auto& [dx, dy] : {std::pair{1, 0}, std::pair{0, 1}}) {
                if (x + dx >= grid_side || y + dy >= grid_side) continue;
                const auto& r = e.sites[site_index(x + dx, y + dy)];
                if (r.tile != s.tile) continue;
                candidates.push_back({site_index(x, y), site_index(x + dx, y + dy),
                                      bond_couplers(s, r)});
            }
        }
    }

    // vacancies: broken qubits, a broken pair coupler, or a broken coupler of
    // any bond inside the tile (both ends)
    for (auto& s : e.sites) {
        if (s.tile < 0) continue;
        s.vacancy = defects.broken(s.a) || defects.broken(s.b) || defects.broken(Edge{s.a, s.b});
    }
    std::vector<int> bond_vacancies;
    for (const auto& c : candidates) {
        for (const auto& cp : c.couplers) {
            if (defects.broken(Edge{cp.q1, cp.q2})) {
                bond_vacancies.push_back(c.s1);
                bond_vacancies.push_back(c.s2);
            }
        }
    }
    for (int i : bond_vacancies) e.sites[i].vacancy = true;

    for (std::size_t i = 0; i < e.sites.size(); ++i) {
        const auto& s = e.sites[i];
        if (!s.active()) continue;
        e.couplers.push_back({s.a, s.b, -J_hc, CouplerKind::high_cost});
        e.qubit_site[s.a] = static_cast<int>(i);
        e.qubit_site[s.b] = static_cast<int>(i);
    }
    for (auto& c : candidates) {
        if (!e.sites[c.s1].active() || !e.sites[c.s2].active()) continue;
        for (const auto& cp : c.couplers) e.couplers.push_back(cp);
    }
    std::sort(e.couplers.begin(), e.couplers.end(), [](const Coupler& p, const Coupler& r) {
        return std::tie(p.q1, p.q2) < std::tie(r.q1, r.q2);
    });
    std::map<Edge, std::size_t> where;
    for (std::size_t i = 0; i < e.couplers.size(); ++i) {
        if (!where.emplace(Edge{e.couplers[i].q1, e.couplers[i].q2}, i).second) {
            throw Error("internal: coupler emitted twice");
        }
    }
    for (const auto& c : candidates) {
        if (!e.sites[c.s1].active() || !e.sites[c.s2].active()) continue;
        Bond b{c.s1, c.s2, {}};
        for (const auto& cp : c.couplers) b.couplers.push_back(where.at(Edge{cp.q1, cp.q2}));
        e.bonds.push_back(std::move(b));
    }
    return e;
}

Embedding gauge_transform(const Embedding& embedding, const std::vector<int>& gauge) {
    if (gauge.size() != embedding.sites.size()) {
        throw ParameterError("gauge needs one entry per grid site (" +
                             std::to_string(embedding.sites.size()) + ")");
    }
    for (int g : gauge) {
        if (g != 1 && g != -1) throw ParameterError("gauge entries must be +1 or -1");
    }
    Embedding out = embedding;
    for (std::size_t i = 0; i < out.sites.size(); ++i) out.sites[i].gauge *= gauge[i];
    for (auto& c : out.couplers) {
        if (c.kind == CouplerKind::high_cost) continue;
        c.J *= gauge[out.qubit_site[c.q1]] * gauge[out.qubit_site[c.q2]];
    }
    return out;
}

double classical_energy(const Embedding& embedding, const std::vector<std::int8_t>& spins,
                        bool include_high_cost) {
    if (spins.size() != static_cast<std::size_t>(n_qubits)) {
        throw ParameterError("a configuration needs one spin per physical qubit");
    }
    double energy = 0.0;
    for (const auto& c : embedding.couplers) {
        if (!include_high_cost && c.kind == CouplerKind::high_cost) continue;
        energy += c.J * spins[c.q1] * spins[c.q2];
    }
    return energy;
}

void write_coupler_list(std::ostream& out, const Embedding& e) {
    out << "# annealscale couplers v1\n";
    out << "# L: " << e.L << '\n';
    out << "# J_ising: " << format_double(e.J_ising) << '\n';
    out << "# J_hc: " << format_double(e.J_hc) << '\n';
    out << "# broken_qubits:";
    for (Qubit q : e.defects.qubits) out << ' ' << q;
    out << "\n# broken_couplers:";
    for (const auto& [a, b] : e.defects.couplers) out << ' ' << a << '-' << b;
    out << '\n';
    if (std::any_of(e.sites.begin(), e.sites.end(), [](const LogicalSite& s) { return s.gauge < 0; })) {
        out << "# gauge: ";
        for (const auto& s : e.sites) out << (s.gauge < 0 ? '-' : '+');
        out << '\n';
    }
    for (const auto& c : e.couplers) out << c.q1 << ' ' << c.q2 << ' ' << format_double(c.J) << '\n';
}

std::string coupler_list_text(const Embedding& embedding) {
    std::ostringstream out;
    write_coupler_list(out, embedding);
    return out.str();
}

Embedding parse_coupler_list(std::istream& in, const std::string& source) {
    std::string line;
    std::size_t line_no = 0;
    std::optional<int> L;
    double J_ising = default_J_ising, J_hc = default_J_hc;
    DefectList defects;
    std::string gauge_text;
    std::vector<Coupler> listed;
    bool saw_magic = false;
    auto fail = [&](const std::string& msg) -> FormatError {
        return FormatError(source + ":" + std::to_string(line_no) + ": " + msg);
    };
    auto number = [&](const std::string& text) {
        try {
            std::size_t used = 0;
            const double v = std::stod(text, &used);
            if (used != text.size()) throw std::invalid_argument(text);
            return v;
        } catch (const std::exception&) {
            throw fail("not a number: '" + text + "'");
        }
    };
    auto index = [&](const std::string& text) -> Qubit {
        if (text.empty() || text.find_first_not_of("0123456789") != std::string::npos) {
            throw fail("not a qubit index: '" + text + "'");
        }
        const unsigned long v = std::stoul(text);
        if (v >= static_cast<unsigned long>(n_qubits)) throw fail("qubit " + text + " out of range");
        return static_cast<Qubit>(v);
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        if (line[0] == '#') {
            std::string body = line.substr(1);
            body.erase(0, body.find_first_not_of(' '));
            if (body.rfind("annealscale couplers", 0) == 0) {
                if (body != "annealscale couplers v1") throw fail("unsupported version: " + body);
                saw_magic = true;
                continue;
            }
            const auto colon = body.find(':');
            if (colon == std::string::npos) continue;
            const std::string key = body.substr(0, colon);
            std::istringstream value(body.substr(colon + 1));
            std::string word;
            if (key == "L") {
                value >> word;
                L = static_cast<int>(number(word));
            } else if (key == "J_ising") {
                value >> word;
                J_ising = number(word);
            } else if (key == "J_hc") {
                value >> word;
                J_hc = number(word);
            } else if (key == "broken_qubits") {
                while (value >> word) defects.qubits.push_back(index(word));
            } else if (key == "broken_couplers") {
                while (value >> word) {
                    const auto dash = word.find('-');
                    if (dash == std::string::npos) throw fail("bad coupler '" + word + "'");
                    defects.couplers.push_back(
                            {index(word.substr(0, dash)), index(word.substr(dash + 1))});
                }
            } else if (key == "gauge") {
                value >> gauge_text;
            }
            continue;
        }
        std::istringstream fields(line);
        std::string a, b, j, extra;
        if (!(fields >> a >> b >> j) || (fields >> extra)) throw fail("expected 'q1 q2 J'");
        Coupler c;
        std::tie(c.q1, c.q2) = make_edge(index(a), index(b));
        c.J = number(j);
        listed.push_back(c);
    }
    if (!saw_magic) throw FormatError(source + ": missing '# annealscale couplers v1' header");
    if (!L) throw FormatError(source + ": missing '# L:' header");

    Embedding e;
    try {
        e = build_embedding(*L, J_ising, defects, J_hc);
    } catch (const ParameterError& err) {
        throw FormatError(source + ": " + err.what());
    }
    if (!gauge_text.empty()) {
        if (gauge_text.size() != e.sites.size()) throw FormatError(source + ": gauge has wrong length");
        std::vector<int> g;
        for (char ch : gauge_text) g.push_back(ch == '-' ? -1 : 1);
        e = gauge_transform(e, g);
    }
    std::sort(listed.begin(), listed.end(), [](const Coupler& p, const Coupler& r) {
        return std::tie(p.q1, p.q2) < std::tie(r.q1, r.q2);
    });
    if (listed.size() != e.couplers.size()) {
        throw FormatError(source + ": coupler mismatch: " + std::to_string(listed.size()) +
                          " listed, " + std::to_string(e.couplers.size()) + " implied by the header");
    }
    for (std::size_t i = 0; i < listed.size(); ++i) {
        const auto& want = e.couplers[i];
        const auto& got = listed[i];
        if (got.q1 != want.q1 || got.q2 != want.q2 || got.J != want.J) {
            throw FormatError(source + ": coupler mismatch at entry " + std::to_string(i + 1) + ": " +
                              std::to_string(got.q1) + " " + std::to_string(got.q2) +
                              " does not match the embedding");
        }
    }
    return e;
}

Embedding read_coupler_list(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open '" + path + "'");
    return parse_coupler_list(in, path);
}

}  // namespace annealscale::chimera

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

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "annealscale/chimera.hpp"
#include "annealscale/error.hpp"
#include "catch2/catch.hpp"

namespace annealscale::chimera {

namespace {

enum class Audit { high_cost, intra, inter };

// Classifies a coupler from qubit coordinates alone.
Audit classify(const Coupler& c) {
    const auto p = coordinates(c.q1), r = coordinates(c.q2);
    if (p.row != r.row || p.col != r.col) return Audit::inter;
    return std::abs(p.k - r.k) == shore && (p.k % shore) == (r.k % shore) ? Audit::high_cost
                                                                           : Audit::intra;
}

std::map<Qubit, int> owner_map(const Embedding& e) {
    std::map<Qubit, int> owner;
    for (std::size_t i = 0; i < e.sites.size(); ++i) {
        owner[e.sites[i].a] = static_cast<int>(i);
        owner[e.sites[i].b] = static_cast<int>(i);
    }
    return owner;
}

std::vector<const Coupler*> touching(const Embedding& e, Qubit q) {
    std::vector<const Coupler*> out;
    for (const auto& c : e.couplers) {
        if (c.q1 == q || c.q2 == q) out.push_back(&c);
    }
    return out;
}

std::vector<int> random_gauge(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<int> g(grid_side * grid_side);
    for (auto& x : g) x = (rng() & 1) ? 1 : -1;
    return g;
}

// Energies of every logical configuration of tile 0, both pair members
// aligned with the site value.
std::vector<double> tile_spectrum(const Embedding& e) {
    std::vector<int> members;
    for (std::size_t i = 0; i < e.sites.size(); ++i) {
        if (e.sites[i].active() && e.sites[i].tile == 0) members.push_back(static_cast<int>(i));
    }
    std::vector<const Coupler*> local;
    for (const auto& c : e.couplers) {
        if (e.qubit_site[c.q1] >= 0 && e.sites[e.qubit_site[c.q1]].tile == 0) local.push_back(&c);
    }
    std::vector<double> energies;
    std::vector<std::int8_t> spin(n_qubits, 1);
    for (std::uint64_t mask = 0; mask < (1ull << members.size()); ++mask) {
        for (std::size_t j = 0; j < members.size(); ++j) {
            const auto& s = e.sites[members[j]];
            spin[s.a] = spin[s.b] = ((mask >> j) & 1) ? -1 : 1;
        }
        double energy = 0.0;
        for (const auto* c : local) energy += c->J * spin[c->q1] * spin[c->q2];
        energies.push_back(energy);
    }
    std::sort(energies.begin(), energies.end());
    return energies;
}

}  // namespace

SCENARIO("the Chimera graph has the expected shape") {
    const auto edges = topology_edges();
    // 16 per cell, 4 * 15 * 16 per direction
    CHECK(edges.size() == 256 * 16 + 2 * 4 * 15 * 16);
    CHECK(std::adjacent_find(edges.begin(), edges.end()) == edges.end());
    std::vector<int> degree(n_qubits, 0);
    for (const auto& [a, b] : edges) {
        CHECK(is_edge(a, b));
        ++degree[a];
        ++degree[b];
    }
    CHECK(*std::min_element(degree.begin(), degree.end()) == 5);
    CHECK(*std::max_element(degree.begin(), degree.end()) == 6);
    CHECK(degree[qubit(5, 5, 2)] == 6);
    CHECK(degree[qubit(0, 5, 2)] == 5);
    CHECK(degree[qubit(5, 15, 6)] == 5);
    CHECK_FALSE(is_edge(qubit(0, 0, 0), qubit(0, 1, 0)));
    CHECK_THROWS_AS(coordinates(n_qubits), ParameterError);
}

SCENARIO("a full-grid embedding uses every qubit") {
    GIVEN("L = 32 without defects") {
        const auto e = build_embedding(32);
        THEN("the coupler census matches the lattice count") {
            std::map<Audit, int> census;
            for (const auto& c : e.couplers) {
                REQUIRE(is_edge(c.q1, c.q2));
                ++census[classify(c)];
            }
            CHECK(census[Audit::high_cost] == 1024);
            CHECK(census[Audit::intra] == 2048);
            CHECK(census[Audit::inter] == 960);
            CHECK(e.couplers.size() == 4032);
            CHECK(e.count(CouplerKind::high_cost) == 1024);
            CHECK(e.count(CouplerKind::intra_cell) == 2048);
            CHECK(e.count(CouplerKind::inter_cell) == 960);
            CHECK(e.bonds.size() == 2 * 32 * 31);
        }
        THEN("every qubit belongs to exactly one site") {
            std::set<Qubit> used;
            for (const auto& s : e.sites) {
                CHECK(s.active());
                used.insert(s.a);
                used.insert(s.b);
            }
            CHECK(used.size() == 2048);
        }
        THEN("cells alternate between four arrangements") {
            CHECK(arrangement(0, 0).label() == "A");
            CHECK(arrangement(0, 1).label() == "B");
            CHECK(arrangement(1, 0).label() == "A'");
            CHECK(arrangement(1, 1).label() == "B'");
        }
    }
}

SCENARIO("a single cell holds an L = 2 tile") {
    const auto e = build_embedding(2);
    std::size_t one_cell = 0;
    for (const auto& t : e.tiles) one_cell += (t.x0 == 0 && t.y0 == 0);
    REQUIRE(one_cell == 1);
    std::vector<Coupler> first;
    for (const auto& c : e.couplers) {
        if (e.sites[e.qubit_site[c.q1]].tile == 0) first.push_back(c);
    }
    std::map<Audit, int> census;
    for (const auto& c : first) {
        ++census[classify(c)];
        CHECK(coordinates(c.q1).row == 0);
        CHECK(coordinates(c.q1).col == 0);
        if (classify(c) == Audit::high_cost) {
            CHECK(c.J == -1.0);
        } else {
            CHECK(c.J == -0.25);
        }
    }
    CHECK(census[Audit::high_cost] == 4);
    CHECK(census[Audit::intra] == 8);
    CHECK(census[Audit::inter] == 0);
    CHECK(e.tiles.size() == 256);
    CHECK(e.count(CouplerKind::inter_cell) == 0);
}

SCENARIO("every lattice bond carries the full Ising strength") {
    for (int L : {2, 3, 4, 5, 7, 8, 10, 11, 16, 17, 24, 31, 32}) {
        const auto e = build_embedding(L, 0.5);
        const auto owner = owner_map(e);
        std::map<std::pair<int, int>, double> strength;
        std::set<std::pair<Qubit, Qubit>> seen;
        for (const auto& c : e.couplers) {
            CHECK(std::abs(c.J) <= 1.0);
            CHECK(c.q1 < c.q2);
            CHECK(seen.insert({c.q1, c.q2}).second);
            const int s1 = owner.at(c.q1), s2 = owner.at(c.q2);
            CHECK(e.sites[s1].tile == e.sites[s2].tile);
            CHECK(e.sites[s1].tile >= 0);
            if (s1 == s2) {
                CHECK(c.J == -1.0);
                continue;
            }
            strength[{std::min(s1, s2), std::max(s1, s2)}] += c.J;
        }
        std::size_t expected_bonds = 0;
        for (const auto& t : e.tiles) {
            for (int y = t.y0; y < t.y0 + t.side; ++y) {
                for (int x = t.x0; x < t.x0 + t.side; ++x) {
                    const int i = y * grid_side + x;
                    if (x + 1 < t.x0 + t.side) {
                        ++expected_bonds;
                        CHECK(strength[{i, i + 1}] == Approx(-0.5));
                    }
                    if (y + 1 < t.y0 + t.side) {
                        ++expected_bonds;
                        CHECK(strength[{i, i + grid_side}] == Approx(-0.5));
                    }
                }
            }
        }
        INFO("L = " << L);
        CHECK(strength.size() == expected_bonds);
        CHECK(e.bonds.size() == expected_bonds);
    }
}

SCENARIO("tiles are disjoint and leave the margin empty") {
    CHECK(tile_partition(16).size() == 4);
    CHECK(tile_partition(8).size() == 16);
    CHECK(tile_partition(2).size() == 256);
    std::vector<std::string> notes;
    CHECK(tile_partition(20, &notes).size() == 1);
    CHECK(notes.size() == 1);
    CHECK_THROWS_AS(tile_partition(1), ParameterError);
    CHECK_THROWS_AS(tile_partition(33), ParameterError);
    CHECK_THROWS_AS(build_embedding(40), ParameterError);

    GIVEN("L = 10") {
        const auto e = build_embedding(10);
        REQUIRE(e.tiles.size() == 9);
        THEN("margin sites are unused") {
            for (const auto& s : e.sites) {
                const bool margin = s.x >= 30 || s.y >= 30;
                CHECK((s.tile < 0) == margin);
                if (margin) {
                    CHECK(touching(e, s.a).empty());
                    CHECK(touching(e, s.b).empty());
                }
            }
        }
        THEN("no coupler crosses a tile boundary") {
            for (const auto& c : e.couplers) {
                const auto& p = e.sites[e.qubit_site[c.q1]];
                const auto& r = e.sites[e.qubit_site[c.q2]];
                CHECK(p.tile == r.tile);
                CHECK(p.x / 10 == r.x / 10);
                CHECK(p.y / 10 == r.y / 10);
            }
        }
    }
}

SCENARIO("defects become isolated vacancies") {
    GIVEN("a broken qubit in the corner pair") {
        const auto clean = build_embedding(32);
        DefectList defects;
        defects.qubits = {clean.site(0, 0).b};
        const auto e = build_embedding(32, 0.5, defects);
        THEN("both members of the pair lose every coupler") {
            CHECK(e.site(0, 0).vacancy);
            CHECK(touching(e, e.site(0, 0).a).empty());
            CHECK(touching(e, e.site(0, 0).b).empty());
            CHECK(e.site(1, 0).active());
            CHECK(e.site(0, 1).active());
            // one HC coupler plus two bonds of two intra couplers each
            CHECK(e.couplers.size() == clean.couplers.size() - 5);
        }
    }
    GIVEN("a broken coupler inside a bond") {
        const auto clean = build_embedding(4);
        const auto& bond = clean.bonds.front();
        const auto& c = clean.couplers[bond.couplers.front()];
        DefectList defects;
        defects.couplers = {{c.q1, c.q2}};
        const auto e = build_embedding(4, 0.5, defects);
        THEN("both sites of the bond become vacancies") {
            CHECK(e.sites[bond.site1].vacancy);
            CHECK(e.sites[bond.site2].vacancy);
        }
    }
    GIVEN("a broken coupler the embedding does not use") {
        const auto clean = build_embedding(32);
        std::set<Edge> used;
        for (const auto& c : clean.couplers) used.insert({c.q1, c.q2});
        Edge unused{};
        for (const auto& edge : topology_edges()) {
            if (!used.count(edge)) {
                unused = edge;
                break;
            }
        }
        DefectList defects;
        defects.couplers = {unused};
        THEN("nothing changes") {
            CHECK(build_embedding(32, 0.5, defects).couplers == clean.couplers);
        }
    }
    GIVEN("defects added one at a time") {
        std::mt19937_64 rng(7);
        DefectList defects;
        auto previous = build_embedding(8).couplers.size();
        const auto edges = topology_edges();
        for (int step = 0; step < 40; ++step) {
            if (step % 2 == 0) {
                defects.qubits.push_back(static_cast<Qubit>(rng() % n_qubits));
            } else {
                defects.couplers.push_back(edges[rng() % edges.size()]);
            }
            const auto now = build_embedding(8, 0.5, defects).couplers.size();
            CHECK(now <= previous);
            previous = now;
        }
    }
    CHECK_THROWS_AS(build_embedding(8, 0.5, DefectList{{5000}, {}}), ParameterError);
    CHECK_THROWS_AS(build_embedding(8, 0.5, DefectList{{}, {{0, 9}}}), ParameterError);
    CHECK_THROWS_AS(build_embedding(8, 1.5), ParameterError);
}

SCENARIO("gauge transforms relabel spins without changing the physics") {
    const auto e = build_embedding(4);
    WHEN("every site keeps its sign") {
        const auto same = gauge_transform(e, std::vector<int>(grid_side * grid_side, 1));
        THEN("nothing changes") { CHECK(same.couplers == e.couplers); }
    }
    WHEN("the gauge is a checkerboard") {
        std::vector<int> g(grid_side * grid_side);
        for (int y = 0; y < grid_side; ++y) {
            for (int x = 0; x < grid_side; ++x) g[y * grid_side + x] = (x + y) % 2 ? -1 : 1;
        }
        const auto afm = gauge_transform(e, g);
        THEN("the ferromagnet becomes an antiferromagnet") {
            for (std::size_t i = 0; i < e.couplers.size(); ++i) {
                if (e.couplers[i].kind == CouplerKind::high_cost) {
                    CHECK(afm.couplers[i].J == e.couplers[i].J);
                } else {
                    CHECK(afm.couplers[i].J == -e.couplers[i].J);
                    CHECK(afm.couplers[i].J > 0.0);
                }
            }
        }
    }
    WHEN("the L = 3 spectrum is enumerated") {
        const auto small = build_embedding(3);
        const auto before = tile_spectrum(small);
        REQUIRE(before.size() == 512);
        for (std::uint64_t seed : {1u, 2u, 3u}) {
            const auto after = tile_spectrum(gauge_transform(small, random_gauge(seed)));
            REQUIRE(after.size() == before.size());
            for (std::size_t i = 0; i < before.size(); ++i) CHECK(after[i] == Approx(before[i]));
        }
    }
    WHEN("the L = 4 ground state is found by brute force") {
        const double original = tile_spectrum(e).front();
        // 24 bonds and 16 pairs
        CHECK(original == Approx(-24 * 0.5 - 16 * 1.0));
        for (std::uint64_t seed : {11u, 12u}) {
            CHECK(tile_spectrum(gauge_transform(e, random_gauge(seed))).front() ==
                  Approx(original));
        }
    }
    CHECK_THROWS_AS(gauge_transform(e, {1, -1}), ParameterError);
}

SCENARIO("coupler lists round-trip exactly") {
    DefectList defects;
    defects.qubits = {17, 400};
    defects.couplers = {make_edge(qubit(3, 3, 1), qubit(3, 3, 6))};
    for (int L : {2, 10, 32}) {
        const auto e = gauge_transform(build_embedding(L, 0.3, defects), random_gauge(L));
        const auto text = coupler_list_text(e);
        std::istringstream in(text);
        const auto back = parse_coupler_list(in);
        CHECK(back.couplers == e.couplers);
        CHECK(back.L == e.L);
        CHECK(back.J_ising == e.J_ising);
        CHECK(coupler_list_text(back) == text);
        for (std::size_t i = 0; i < e.sites.size(); ++i) {
            CHECK(back.sites[i].gauge == e.sites[i].gauge);
            CHECK(back.sites[i].vacancy == e.sites[i].vacancy);
        }
    }
    GIVEN("a list whose couplers disagree with its header") {
        auto text = coupler_list_text(build_embedding(4));
        const auto last = text.rfind("-0.25");
        REQUIRE(last != std::string::npos);
        text.replace(last, 5, "-0.26");
        std::istringstream in(text);
        THEN("parsing fails") { CHECK_THROWS_AS(parse_coupler_list(in), FormatError); }
    }
    GIVEN("text that is not a coupler list") {
        std::istringstream in("0 4 -1\n");
        CHECK_THROWS_AS(parse_coupler_list(in), FormatError);
    }
}

}  // namespace annealscale::chimera

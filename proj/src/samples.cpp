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

#include "annealscale/samples.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "annealscale/ensemble.hpp"
#include "annealscale/error.hpp"
#include "annealscale/noise.hpp"

namespace annealscale::chimera {

namespace {

constexpr char magic[4] = {'A', 'S', 'M', 'P'};
constexpr std::uint32_t binary_version = 1;

template <class T>
void put(std::ostream& out, T value) {
    static_assert(std::is_trivially_copyable_v<T>);
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
    out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <class T>
T get(std::istream& in, const std::string& path) {
    unsigned char bytes[sizeof(T)];
    if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T))) {
        throw FormatError(path + ": truncated binary sample file");
    }
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
    T value;
    std::memcpy(&value, bytes, sizeof(T));
    return value;
}

struct TileGeometry {
    std::vector<int> sites;                  // active sites
    std::vector<std::size_t> ising_couplers;
    std::vector<std::size_t> bonds;
    int vacancies = 0;
    double min_energy = 0.0;
};

std::vector<TileGeometry> tile_geometry(const Embedding& e) {
    std::vector<TileGeometry> tiles(e.tiles.size());
    for (std::size_t i = 0; i < e.sites.size(); ++i) {
        const auto& s = e.sites[i];
        if (s.tile < 0) continue;
        if (s.vacancy) {
            ++tiles[s.tile].vacancies;
        } else {
            tiles[s.tile].sites.push_back(static_cast<int>(i));
        }
    }
    for (std::size_t b = 0; b < e.bonds.size(); ++b) {
        auto& t = tiles[e.sites[e.bonds[b].site1].tile];
        t.bonds.push_back(b);
        for (std::size_t c : e.bonds[b].couplers) {
            t.ising_couplers.push_back(c);
            t.min_energy -= std::abs(e.couplers[c].J);
        }
    }
    return tiles;
}

}  // namespace

void SampleSet::validate() const {
    if (records.size() != runs.size()) throw FormatError("one metadata entry per run is required");
    for (std::size_t r = 0; r < records.size(); ++r) {
        if (records[r].size() != static_cast<std::size_t>(n_qubits)) {
            throw FormatError("run " + std::to_string(r) + " has " +
                              std::to_string(records[r].size()) + " values, expected " +
                              std::to_string(n_qubits));
        }
        for (auto s : records[r]) {
            if (s != 1 && s != -1) {
                throw FormatError("run " + std::to_string(r) + " holds a value other than +-1");
            }
        }
    }
}

std::string sidecar_path(const std::string& samples_path) { return samples_path + ".json"; }

void write_samples_text(const std::string& path, const SampleSet& samples) {
    samples.validate();
    std::ofstream out(path);
    if (!out) throw Error("cannot write '" + path + "'");
    for (const auto& rec : samples.records) {
        for (std::size_t i = 0; i < rec.size(); ++i) out << (i ? " " : "") << int(rec[i]);
        out << '\n';
    }
    nlohmann::json meta;
    meta["format"] = "annealscale-samples";
    meta["version"] = 1;
    meta["n_qubits"] = n_qubits;
    meta["runs"] = nlohmann::json::array();
    for (const auto& r : samples.runs) {
        meta["runs"].push_back({{"annealing_time", r.annealing_time}, {"timestamp", r.timestamp}});
    }
    std::ofstream side(sidecar_path(path));
    if (!side) throw Error("cannot write '" + sidecar_path(path) + "'");
    side << meta.dump(2) << '\n';
}

SampleSet read_samples_text(const std::string& path, std::optional<double> annealing_time) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open '" + path + "'");
    SampleSet set;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream fields(line);
        std::vector<std::int8_t> rec;
        rec.reserve(n_qubits);
        std::string word;
        while (fields >> word) {
            if (word == "1" || word == "+1") {
                rec.push_back(1);
            } else if (word == "-1") {
                rec.push_back(-1);
            } else {
                throw FormatError(path + ":" + std::to_string(line_no) + ": value '" + word +
                                  "' is not +-1");
            }
        }
        if (rec.empty()) continue;
        if (rec.size() != static_cast<std::size_t>(n_qubits)) {
            throw FormatError(path + ":" + std::to_string(line_no) + ": record length " +
                              std::to_string(rec.size()) + ", expected " + std::to_string(n_qubits));
        }
        set.records.push_back(std::move(rec));
    }

    const auto side = sidecar_path(path);
    if (std::filesystem::exists(side)) {
        std::ifstream sin(side);
        nlohmann::json meta;
        try {
            meta = nlohmann::json::parse(sin);
            if (meta.value("format", "") != "annealscale-samples") {
                throw FormatError(side + ": not an annealscale sample sidecar");
            }
            if (meta.value("version", 0) != 1) throw FormatError(side + ": unsupported version");
            if (meta.value("n_qubits", n_qubits) != n_qubits) {
                throw FormatError(side + ": sidecar describes a different qubit count");
            }
            const double shared = meta.value("annealing_time", annealing_time.value_or(NAN));
            const auto& runs = meta.contains("runs") ? meta["runs"] : nlohmann::json::array();
            if (!runs.empty() && runs.size() != set.records.size()) {
                throw FormatError(side + ": " + std::to_string(runs.size()) + " run entries for " +
                                  std::to_string(set.records.size()) + " records");
            }
            for (std::size_t r = 0; r < set.records.size(); ++r) {
                RunMetadata m;
                m.annealing_time = shared;
                if (!runs.empty()) {
                    m.annealing_time = runs[r].value("annealing_time", shared);
                    m.timestamp = runs[r].value("timestamp", "");
                }
                if (annealing_time) m.annealing_time = *annealing_time;
                set.runs.push_back(m);
            }
        } catch (const nlohmann::json::exception& e) {
            throw FormatError(side + ": " + e.what());
        }
    } else if (annealing_time) {
        set.runs.assign(set.records.size(), RunMetadata{*annealing_time, ""});
    } else {
        throw FormatError(path + ": no sidecar '" + side + "' and no annealing time given");
    }
    for (const auto& m : set.runs) {
        if (!(m.annealing_time > 0.0)) throw FormatError(path + ": annealing time must be positive");
    }
    set.validate();
    return set;
}

void write_samples_binary(const std::string& path, const SampleSet& samples) {
    samples.validate();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path + "'");
    out.write(magic, 4);
    put<std::uint32_t>(out, binary_version);
    put<std::uint32_t>(out, n_qubits);
    put<std::uint64_t>(out, samples.records.size());
    for (std::size_t r = 0; r < samples.records.size(); ++r) {
        put<double>(out, samples.runs[r].annealing_time);
        put<std::uint32_t>(out, static_cast<std::uint32_t>(samples.runs[r].timestamp.size()));
        out.write(samples.runs[r].timestamp.data(),
                  static_cast<std::streamsize>(samples.runs[r].timestamp.size()));
        out.write(reinterpret_cast<const char*>(samples.records[r].data()), n_qubits);
    }
}

SampleSet read_samples_binary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path + "'");
    char head[4];
    if (!in.read(head, 4) || std::memcmp(head, magic, 4) != 0) {
        throw FormatError(path + ": missing ASMP magic");
    }
    if (get<std::uint32_t>(in, path) != binary_version) {
        throw FormatError(path + ": unsupported binary version");
    }
    if (get<std::uint32_t>(in, path) != static_cast<std::uint32_t>(n_qubits)) {
        throw FormatError(path + ": record length does not match the Chimera graph");
    }
    const auto n_runs = get<std::uint64_t>(in, path);
    SampleSet set;
    for (std::uint64_t r = 0; r < n_runs; ++r) {
        RunMetadata m;
        m.annealing_time = get<double>(in, path);
        const auto len = get<std::uint32_t>(in, path);
        m.timestamp.resize(len);
        std::vector<std::int8_t> rec(n_qubits);
        if (!in.read(m.timestamp.data(), len) ||
            !in.read(reinterpret_cast<char*>(rec.data()), n_qubits)) {
            throw FormatError(path + ": truncated binary sample file");
        }
        set.runs.push_back(std::move(m));
        set.records.push_back(std::move(rec));
    }
    if (in.peek() != std::char_traits<char>::eof()) throw FormatError(path + ": trailing bytes");
    set.validate();
    return set;
}

SampleSet read_samples(const std::string& path, std::optional<double> annealing_time) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path + "'");
    char head[4] = {};
    in.read(head, 4);
    if (in.gcount() == 4 && std::memcmp(head, magic, 4) == 0) {
        auto set = read_samples_binary(path);
        if (annealing_time) {
            for (auto& m : set.runs) m.annealing_time = *annealing_time;
        }
        return set;
    }
    return read_samples_text(path, annealing_time);
}

std::vector<TileRecord> decode_samples(const SampleSet& samples, const Embedding& e,
                                       const DecodeOptions& options) {
    samples.validate();
    if (e.qubit_site.size() != static_cast<std::size_t>(n_qubits)) {
        throw ParameterError("embedding is not initialized");
    }
    const auto tiles = tile_geometry(e);
    const double bond_energy = 2.0 * e.J_ising;
    std::vector<TileRecord> out;
    out.reserve(samples.records.size() * tiles.size());
    for (std::size_t r = 0; r < samples.records.size(); ++r) {
        const auto& s = samples.records[r];
        for (std::size_t t = 0; t < tiles.size(); ++t) {
            const auto& g = tiles[t];
            TileRecord rec;
            rec.tile = e.tiles[t].id;
            rec.run = r;
            rec.L = e.L;
            rec.annealing_time = samples.runs[r].annealing_time;
            rec.vacancies = g.vacancies;
            rec.excluded = static_cast<double>(g.vacancies) >
                           options.vacancy_threshold * static_cast<double>(e.L * e.L);

            double energy = 0.0;
            for (std::size_t c : g.ising_couplers) {
                const auto& cp = e.couplers[c];
                energy += cp.J * s[cp.q1] * s[cp.q2];
            }
            rec.delta_e_physical = (energy - g.min_energy) / bond_energy;

            long m_phys = 0, m_log = 0;
            for (int i : g.sites) {
                const auto& site = e.sites[i];
                m_phys += site.gauge * (s[site.a] + s[site.b]);
                m_log += site.gauge * s[site.a];
                if (s[site.a] != s[site.b]) ++rec.hc_violations;
            }
            const auto n = static_cast<long>(g.sites.size());
            rec.delta_m_physical = static_cast<double>(2 * n - std::labs(m_phys));
            rec.delta_m_logical = static_cast<double>(n - std::labs(m_log));

            int broken = 0;
            for (std::size_t b : g.bonds) {
                const auto& p = e.sites[e.bonds[b].site1];
                const auto& q = e.sites[e.bonds[b].site2];
                if (p.gauge * s[p.a] != q.gauge * s[q.a]) ++broken;
            }
            rec.delta_e_logical = broken;
            out.push_back(rec);
        }
    }
    return out;
}

void write_tile_table(std::ostream& out, const std::vector<TileRecord>& records) {
    out << "# annealscale tiles v1\n";
    out << "tile,run,L,annealing_time,delta_e_physical,delta_m_physical,delta_e_logical,"
           "delta_m_logical,hc_violations,vacancies,excluded\n";
    for (const auto& r : records) {
        out << r.tile << ',' << r.run << ',' << r.L << ',' << format_double(r.annealing_time) << ','
            << format_double(r.delta_e_physical) << ',' << format_double(r.delta_m_physical) << ','
            << format_double(r.delta_e_logical) << ',' << format_double(r.delta_m_logical) << ','
            << r.hc_violations << ',' << r.vacancies << ',' << (r.excluded ? 1 : 0) << '\n';
    }
}

std::vector<TileRecord> parse_tile_table(std::istream& in, const std::string& source) {
    std::vector<TileRecord> out;
    std::string line;
    std::size_t line_no = 0;
    bool header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        if (!header) {
            if (line.rfind("tile,run,L,annealing_time", 0) != 0) {
                throw FormatError(source + ":" + std::to_string(line_no) + ": not a tile table");
            }
            header = true;
            continue;
        }
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream f(line);
        TileRecord r;
        int excluded = 0;
        if (!(f >> r.tile >> r.run >> r.L >> r.annealing_time >> r.delta_e_physical >>
              r.delta_m_physical >> r.delta_e_logical >> r.delta_m_logical >> r.hc_violations >>
              r.vacancies >> excluded)) {
            throw FormatError(source + ":" + std::to_string(line_no) + ": malformed tile row");
        }
        r.excluded = excluded != 0;
        out.push_back(r);
    }
    if (!header) throw FormatError(source + ": no tile table header");
    return out;
}

DecodeVariant parse_decode_variant(const std::string& name) {
    if (name == "physical") return DecodeVariant::physical;
    if (name == "logical") return DecodeVariant::logical;
    throw ParameterError("unknown variant '" + name + "' (expected physical or logical)");
}

CurveTable aggregate_tiles(const std::vector<TileRecord>& records, DecodeVariant variant,
                           std::size_t n_bins) {
    std::map<std::pair<int, double>, std::pair<std::vector<double>, std::vector<double>>> groups;
    for (const auto& r : records) {
        if (r.excluded) continue;
        auto& g = groups[{r.L, r.annealing_time}];
        const bool phys = variant == DecodeVariant::physical;
        g.first.push_back(phys ? r.delta_e_physical : r.delta_e_logical);
        g.second.push_back(phys ? r.delta_m_physical : r.delta_m_logical);
    }
    CurveTable table;
    table.header.schema = "device";
    table.header.with_magnetization = true;
    table.header.notes.push_back(std::string("variant: ") +
                                 (variant == DecodeVariant::physical ? "physical" : "logical"));
    table.header.notes.push_back("v = 1 / annealing_time");
    for (const auto& [key, values] : groups) {
        const auto e = binned_mean(values.first, n_bins);
        const auto m = binned_mean(values.second, n_bins);
        CurveRow row;
        row.L = static_cast<std::size_t>(key.first);
        row.v = 1.0 / key.second;
        row.delta_e_mean = e.mean;
        row.delta_e_stderr = e.stderr_;
        row.n_real = values.first.size();
        row.n_bins = e.n_bins;
        row.delta_m_mean = m.mean;
        row.delta_m_stderr = m.stderr_;
        table.rows.push_back(row);
    }
    std::sort(table.rows.begin(), table.rows.end(), [](const CurveRow& a, const CurveRow& b) {
        return a.L != b.L ? a.L < b.L : a.v < b.v;
    });
    return table;
}

SampleSet synthetic_samples(const Embedding& e, const BernoulliDefects& model, std::size_t runs,
                            double annealing_time, std::uint64_t seed) {
    if (!(model.flip >= 0.0 && model.flip <= 1.0 && model.hc_violation >= 0.0 &&
          model.hc_violation <= 1.0)) {
        throw ParameterError("probabilities must lie in [0, 1]");
    }
    if (!(annealing_time > 0.0)) throw ParameterError("annealing time must be positive");
    SampleSet set;
    for (std::size_t r = 0; r < runs; ++r) {
        auto rng = make_engine(derive_seed(seed, {r}));
        std::bernoulli_distribution down(model.flip), violate(model.hc_violation);
        std::vector<std::int8_t> rec(n_qubits, 1);
        for (const auto& site : e.sites) {
            if (!site.active()) continue;
            const std::int8_t spin = down(rng) ? -1 : 1;
            rec[site.a] = static_cast<std::int8_t>(spin * site.gauge);
            rec[site.b] = rec[site.a];
            if (violate(rng)) rec[site.b] = static_cast<std::int8_t>(-rec[site.b]);
        }
        set.records.push_back(std::move(rec));
        set.runs.push_back({annealing_time, "synthetic run " + std::to_string(r)});
    }
    return set;
}

double expected_delta_m(std::size_t n_spins, double q) {
    if (!(q >= 0.0 && q <= 1.0)) throw ParameterError("probability must lie in [0, 1]");
    const auto n = static_cast<double>(n_spins);
    if (q == 0.0 || q == 1.0) return 0.0;
    double expected_abs = 0.0;
    for (std::size_t k = 0; k <= n_spins; ++k) {
        const double kk = static_cast<double>(k);
        const double log_p = std::lgamma(n + 1) - std::lgamma(kk + 1) - std::lgamma(n - kk + 1) +
                             kk * std::log(q) + (n - kk) * std::log1p(-q);
        expected_abs += std::exp(log_p) * std::abs(n - 2.0 * kk);
    }
    return n - expected_abs;
}

double expected_delta_e(std::size_t n_bonds, double q) {
    if (!(q >= 0.0 && q <= 1.0)) throw ParameterError("probability must lie in [0, 1]");
    return static_cast<double>(n_bonds) * 2.0 * q * (1.0 - q);
}

}  // namespace annealscale::chimera

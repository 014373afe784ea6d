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

#include "annealscale/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "annealscale/digest.hpp"
#include "annealscale/table.hpp"

#ifndef ANNEALSCALE_VERSION
#define ANNEALSCALE_VERSION "0.0.0"
#endif

namespace annealscale {

namespace {

class Reader {
  public:
    Reader(std::string source, std::set<std::string> overridden)
            : source_(std::move(source)), overridden_(std::move(overridden)) {}

    std::string where(const YAML::Node& node, const std::string& path) const {
        for (const auto& o : overridden_) {
            if (path == o || path.rfind(o + ".", 0) == 0) return "override '" + o + "'";
        }
        const auto mark = node.Mark();
        if (mark.is_null()) return "override '" + path + "'";
        return source_ + ":" + std::to_string(mark.line + 1) + ":" + std::to_string(mark.column + 1);
    }

    [[noreturn]] void fail(const YAML::Node& node, const std::string& path,
                           const std::string& message) const {
        throw ConfigError(where(node, path) + ": " + path + ": " + message);
    }

    void expect_map(const YAML::Node& node, const std::string& path) const {
        if (!node.IsMap()) fail(node, path, "expected a mapping");
    }

    void allow(const YAML::Node& map, const std::string& path,
               std::initializer_list<const char*> keys) const {
        expect_map(map, path);
        for (const auto& kv : map) {
            const auto key = kv.first.as<std::string>();
            const bool known = std::any_of(keys.begin(), keys.end(),
                                           [&](const char* k) { return key == k; });
            if (!known) {
                std::string list;
                for (const char* k : keys) list += std::string(list.empty() ? "" : ", ") + k;
                fail(kv.first, join(path, key), "unknown key (expected one of: " + list + ")");
            }
        }
    }

    template <class T>
    void read(const YAML::Node& map, const std::string& path, const char* key, T& out) const {
        const auto node = map[key];
        if (!node.IsDefined() || node.IsNull()) return;
        try {
            out = node.as<T>();
        } catch (const YAML::Exception&) {
            fail(node, join(path, key), "cannot read '" + scalar_text(node) + "' as " + type_name<T>());
        }
        if constexpr (std::is_arithmetic_v<T> && !std::is_same_v<T, bool>) {
            if constexpr (std::is_unsigned_v<T>) {
                if (node.IsScalar() && !node.Scalar().empty() && node.Scalar()[0] == '-') {
                    fail(node, join(path, key), "must not be negative");
                }
            }
        }
    }

    double positive(const YAML::Node& map, const std::string& path, const char* key,
                    double fallback) const {
        double value = fallback;
        read(map, path, key, value);
        if (!(value > 0.0)) fail(map[key], join(path, key), "must be positive");
        return value;
    }

    static std::string join(const std::string& path, const std::string& key) {
        return path.empty() ? key : path + "." + key;
    }

  private:
    static std::string scalar_text(const YAML::Node& node) {
        if (node.IsScalar()) return node.Scalar();
        YAML::Emitter out;
        out << YAML::Flow << node;
        return out.c_str();
    }

    template <class T>
    static std::string type_name() {
        if constexpr (std::is_same_v<T, bool>) return "a boolean";
        else if constexpr (std::is_integral_v<T>) return "an integer";
        else if constexpr (std::is_floating_point_v<T>) return "a number";
        else if constexpr (std::is_same_v<T, std::string>) return "a string";
        else return "a list";
    }

    std::string source_;
    std::set<std::string> overridden_;
};

YAML::Node parse_document(const std::string& text, const std::string& source) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw ConfigError(source + ":" + std::to_string(e.mark.line + 1) + ":" +
                          std::to_string(e.mark.column + 1) + ": " + e.msg);
    }
    if (root.IsNull() || !root.IsDefined()) return YAML::Node(YAML::NodeType::Map);
    if (!root.IsMap()) throw ConfigError(source + ": the document must be a mapping");
    return root;
}

std::string apply_override(YAML::Node& root, const std::string& text) {
    const auto eq = text.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw ConfigError("override '" + text + "': expected key=value");
    }
    const std::string path = text.substr(0, eq);
    YAML::Node value;
    try {
        value = YAML::Load(text.substr(eq + 1));
    } catch (const YAML::ParserException& e) {
        throw ConfigError("override '" + path + "': " + e.msg);
    }
    std::vector<std::string> keys;
    std::stringstream ss(path);
    for (std::string k; std::getline(ss, k, '.');) {
        if (k.empty()) throw ConfigError("override '" + path + "': empty key");
        keys.push_back(k);
    }
    YAML::Node cur;
    cur.reset(root);
    for (std::size_t i = 0; i + 1 < keys.size(); ++i) {
        YAML::Node next = cur[keys[i]];
        if (!next.IsDefined() || next.IsNull()) {
            cur[keys[i]] = YAML::Node(YAML::NodeType::Map);
            next.reset(cur[keys[i]]);
        } else if (!next.IsMap()) {
            throw ConfigError("override '" + path + "': '" + keys[i] + "' is not a section");
        }
        cur.reset(next);
    }
    cur[keys.back()] = value;
    return path;
}

// Sorted, flow-style rendering; scalars keep their source text.
void canonical_node(const YAML::Node& node, std::ostream& out) {
    switch (node.Type()) {
        case YAML::NodeType::Map: {
            std::map<std::string, YAML::Node> sorted;
            for (const auto& kv : node) sorted.emplace(kv.first.as<std::string>(), kv.second);
            out << '{';
            bool first = true;
            for (const auto& [k, v] : sorted) {
                out << (first ? "" : ", ") << k << ": ";
                canonical_node(v, out);
                first = false;
            }
            out << '}';
            break;
        }
        case YAML::NodeType::Sequence: {
            out << '[';
            for (std::size_t i = 0; i < node.size(); ++i) {
                if (i) out << ", ";
                canonical_node(node[i], out);
            }
            out << ']';
            break;
        }
        case YAML::NodeType::Scalar: {
            YAML::Emitter e;
            e << YAML::DoubleQuoted << node.Scalar();
            out << e.c_str();
            break;
        }
        default:
            out << "null";
    }
}

void read_spectrum(const Reader& r, const YAML::Node& parent, const std::string& path,
                   NoiseSpectrum& spectrum) {
    const auto node = parent["spectrum"];
    if (!node.IsDefined() || node.IsNull()) return;
    const auto p = Reader::join(path, "spectrum");
    r.allow(node, p, {"lambda", "p", "omega0", "modes"});
    r.read(node, p, "lambda", spectrum.coupling);
    r.read(node, p, "p", spectrum.exponent);
    r.read(node, p, "omega0", spectrum.cutoff);
    r.read(node, p, "modes", spectrum.n_modes);
}

template <class F>
void checked(const Reader& r, const YAML::Node& node, const std::string& path, F&& f) {
    try {
        f();
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        r.fail(node, path, e.what());
    }
}

void read_simulate(const Reader& r, const YAML::Node& node, SimulateConfig& c) {
    const std::string p = "simulate";
    r.allow(node, p,
            {"sizes", "velocities", "grid_points", "realizations", "bins", "noise", "noise_site",
             "spectrum", "schedule", "integrator", "output", "resume"});
    auto& plan = c.plan;
    r.read(node, p, "sizes", plan.sizes);
    r.read(node, p, "velocities", plan.velocities);
    r.read(node, p, "grid_points", c.grid_points);
    r.read(node, p, "realizations", plan.n_realizations);
    r.read(node, p, "bins", plan.n_bins);
    std::string noise = to_string(plan.noise);
    r.read(node, p, "noise", noise);
    checked(r, node["noise"], p + ".noise", [&] { plan.noise = parse_noise_placement(noise); });
    r.read(node, p, "noise_site", plan.noise_site);
    read_spectrum(r, node, p, plan.spectrum);
    if (const auto s = node["schedule"]; s.IsDefined() && !s.IsNull()) {
        r.allow(s, p + ".schedule", {"bond_power", "field_power"});
        plan.schedule.bond_power = r.positive(s, p + ".schedule", "bond_power", plan.schedule.bond_power);
        plan.schedule.field_power =
                r.positive(s, p + ".schedule", "field_power", plan.schedule.field_power);
    }
    if (const auto s = node["integrator"]; s.IsDefined() && !s.IsNull()) {
        const auto ip = p + ".integrator";
        r.allow(s, ip, {"method", "rtol", "atol"});
        std::string method = to_string(plan.stepper.method);
        r.read(s, ip, "method", method);
        checked(r, s["method"], ip + ".method", [&] { plan.stepper.method = parse_bdg_method(method); });
        plan.stepper.options.rtol = r.positive(s, ip, "rtol", plan.stepper.options.rtol);
        plan.stepper.options.atol = r.positive(s, ip, "atol", plan.stepper.options.atol);
    }
    r.read(node, p, "output", c.output);
    r.read(node, p, "resume", c.resume);
    if (plan.velocities.empty()) {
        if (c.grid_points < 2) r.fail(node["grid_points"], p + ".grid_points", "needs at least 2 points");
        for (std::size_t L : plan.sizes) {
            plan.size_velocities[L] = default_velocity_grid(L, c.grid_points);
        }
    }
}

void read_qubit(const Reader& r, const YAML::Node& node, QubitConfig& c) {
    const std::string p = "qubit";
    r.allow(node, p,
            {"h_z", "spectrum", "t_max", "dt_out", "realizations", "rtol", "atol", "split", "output"});
    auto& run = c.run;
    r.read(node, p, "h_z", run.h_z);
    read_spectrum(r, node, p, run.spectrum);
    r.read(node, p, "t_max", run.t_max);
    r.read(node, p, "dt_out", run.dt_out);
    r.read(node, p, "realizations", run.n_realizations);
    run.stepper.rtol = r.positive(node, p, "rtol", run.stepper.rtol);
    run.stepper.atol = r.positive(node, p, "atol", run.stepper.atol);
    r.read(node, p, "split", c.split);
    r.read(node, p, "output", c.output);
}

void read_fit(const Reader& r, const YAML::Node& node, const std::string& p, FitConfig& c) {
    r.allow(node, p,
            {"input", "observable", "sizes", "v_min", "v_max", "plateau_fraction",
             "max_iterations", "tolerance", "output"});
    r.read(node, p, "input", c.input);
    std::string observable = "energy";
    r.read(node, p, "observable", observable);
    checked(r, node["observable"], p + ".observable",
            [&] { c.observable = parse_observable(observable); });
    r.read(node, p, "sizes", c.sizes);
    r.read(node, p, "v_min", c.selection.v_lo);
    r.read(node, p, "v_max", c.selection.v_hi);
    if (const auto f = node["plateau_fraction"]; f.IsDefined()) {
        if (f.IsNull() || (f.IsScalar() && f.Scalar() == "none")) {
            c.selection.plateau_fraction.reset();
        } else {
            double value = 0.8;
            r.read(node, p, "plateau_fraction", value);
            if (!(value > 0.0 && value <= 1.0)) {
                r.fail(f, p + ".plateau_fraction", "must lie in (0, 1]");
            }
            c.selection.plateau_fraction = value;
        }
    }
    r.read(node, p, "max_iterations", c.options.max_iterations);
    c.options.tolerance = r.positive(node, p, "tolerance", c.options.tolerance);
    r.read(node, p, "output", c.output);
    if (c.selection.v_lo < 0.0 || c.selection.v_hi < 0.0) {
        r.fail(node, p, "velocity bounds must not be negative");
    }
}

void read_kzm(const Reader& r, const YAML::Node& node, KzmInput& k) {
    r.allow(node, "kzm", {"d", "z", "nu", "kappa"});
    r.read(node, "kzm", "d", k.d);
    r.read(node, "kzm", "z", k.z);
    r.read(node, "kzm", "nu", k.nu);
    r.read(node, "kzm", "kappa", k.kappa);
    checked(r, node, "kzm", [&] { k.validate(); });
}

void read_embed(const Reader& r, const YAML::Node& node, EmbedConfig& c) {
    const std::string p = "embed";
    r.allow(node, p,
            {"L", "J_ising", "J_hc", "broken_qubits", "broken_couplers", "gauge", "gauge_seed",
             "output"});
    r.read(node, p, "L", c.L);
    if (c.L < 2 || c.L > chimera::grid_side) r.fail(node["L"], p + ".L", "must lie in [2, 32]");
    r.read(node, p, "J_ising", c.J_ising);
    if (!(c.J_ising > 0.0 && c.J_ising <= 1.0)) r.fail(node["J_ising"], p + ".J_ising", "must lie in (0, 1]");
    r.read(node, p, "J_hc", c.J_hc);
    if (!(c.J_hc > 0.0 && c.J_hc <= 1.0)) r.fail(node["J_hc"], p + ".J_hc", "must lie in (0, 1]");
    r.read(node, p, "broken_qubits", c.defects.qubits);
    std::vector<std::vector<chimera::Qubit>> couplers;
    r.read(node, p, "broken_couplers", couplers);
    for (const auto& pair : couplers) {
        if (pair.size() != 2) r.fail(node["broken_couplers"], p + ".broken_couplers", "entries are [q1, q2]");
        c.defects.couplers.push_back(chimera::make_edge(pair[0], pair[1]));
    }
    checked(r, node, p, [&] { c.defects.validate(); });
    r.read(node, p, "gauge", c.gauge);
    if (c.gauge != "none" && c.gauge != "checkerboard" && c.gauge != "random") {
        r.fail(node["gauge"], p + ".gauge", "expected none, checkerboard or random");
    }
    r.read(node, p, "gauge_seed", c.gauge_seed);
    r.read(node, p, "output", c.output);
}

void read_decode(const Reader& r, const YAML::Node& node, DecodeConfig& c) {
    const std::string p = "decode";
    r.allow(node, p, {"samples", "couplers", "annealing_time", "vacancy_threshold", "output"});
    r.read(node, p, "samples", c.samples);
    r.read(node, p, "couplers", c.couplers);
    if (node["annealing_time"].IsDefined() && !node["annealing_time"].IsNull()) {
        c.annealing_time = r.positive(node, p, "annealing_time", 1.0);
    }
    r.read(node, p, "vacancy_threshold", c.options.vacancy_threshold);
    if (!(c.options.vacancy_threshold >= 0.0 && c.options.vacancy_threshold <= 1.0)) {
        r.fail(node["vacancy_threshold"], p + ".vacancy_threshold", "must lie in [0, 1]");
    }
    r.read(node, p, "output", c.output);
}

void read_aggregate(const Reader& r, const YAML::Node& node, AggregateConfig& c) {
    const std::string p = "aggregate";
    r.allow(node, p, {"input", "variant", "bins", "output"});
    r.read(node, p, "input", c.input);
    std::string variant = "physical";
    r.read(node, p, "variant", variant);
    checked(r, node["variant"], p + ".variant",
            [&] { c.variant = chimera::parse_decode_variant(variant); });
    r.read(node, p, "bins", c.bins);
    if (c.bins < 1) r.fail(node["bins"], p + ".bins", "must be at least 1");
    r.read(node, p, "output", c.output);
}

void read_oracle(const Reader& r, const YAML::Node& node, OracleConfig& c) {
    const std::string p = "oracle";
    r.allow(node, p, {"sizes", "cases", "T", "spectrum", "tolerance"});
    r.read(node, p, "sizes", c.sizes);
    for (std::size_t L : c.sizes) {
        if (L < 2 || L > 12) r.fail(node["sizes"], p + ".sizes", "sizes must lie in [2, 12]");
    }
    r.read(node, p, "cases", c.cases);
    c.T = r.positive(node, p, "T", c.T);
    read_spectrum(r, node, p, c.spectrum);
    c.tolerance = r.positive(node, p, "tolerance", c.tolerance);
}

void propagate(RunConfig& c) {
    c.simulate.plan.master_seed = c.master_seed;
    c.simulate.plan.workers = c.workers;
    c.qubit.run.master_seed = c.master_seed;
    c.qubit.run.workers = c.workers;
}

}  // namespace

std::string tool_version() { return ANNEALSCALE_VERSION; }

RunConfig load_config(const std::string& text, const std::string& source,
                      const std::vector<std::string>& overrides) {
    YAML::Node root = parse_document(text, source);
    std::set<std::string> overridden;
    for (const auto& o : overrides) overridden.insert(apply_override(root, o));

    const Reader r(source, overridden);
    r.allow(root, "",
            {"master_seed", "output_dir", "workers", "simulate", "qubit", "fit", "collapse", "kzm",
             "embed", "decode", "aggregate", "oracle"});
    RunConfig c;
    r.read(root, "", "master_seed", c.master_seed);
    r.read(root, "", "output_dir", c.output_dir);
    r.read(root, "", "workers", c.workers);

    auto section = [&](const char* key) {
        const auto node = root[key];
        return node.IsDefined() && !node.IsNull() ? node : YAML::Node(YAML::NodeType::Map);
    };
    auto present = [&](const char* key) {
        const auto node = root[key];
        return node.IsDefined() && !node.IsNull();
    };
    read_simulate(r, section("simulate"), c.simulate);
    read_qubit(r, section("qubit"), c.qubit);
    read_fit(r, section("fit"), "fit", c.fit);
    read_fit(r, section("collapse"), "collapse", c.collapse);
    read_kzm(r, section("kzm"), c.kzm);
    read_embed(r, section("embed"), c.embed);
    read_decode(r, section("decode"), c.decode);
    read_aggregate(r, section("aggregate"), c.aggregate);
    read_oracle(r, section("oracle"), c.oracle);
    propagate(c);

    if (present("simulate")) checked(r, root["simulate"], "simulate", [&] { c.simulate.plan.validate(); });
    if (present("qubit")) checked(r, root["qubit"], "qubit", [&] { c.qubit.run.validate(); });
    if (present("oracle")) checked(r, root["oracle"], "oracle.spectrum", [&] { c.oracle.spectrum.validate(); });

    YAML::Node digestible = YAML::Clone(root);
    digestible.remove("workers");
    digestible.remove("output_dir");
    std::ostringstream canon;
    canonical_node(digestible, canon);
    c.canonical = canon.str();
    c.digest = sha256_hex(c.canonical);
    return c;
}

RunConfig load_config_file(const std::string& path, const std::vector<std::string>& overrides) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path + "'");
    std::stringstream text;
    text << in.rdbuf();
    return load_config(text.str(), path, overrides);
}

void apply_environment(RunConfig& config) {
    if (const char* w = std::getenv("ANNEALSCALE_WORKERS"); w && *w) {
        char* end = nullptr;
        const long n = std::strtol(w, &end, 10);
        if (*end != '\0' || n < 0) {
            throw ConfigError(std::string("ANNEALSCALE_WORKERS: not a worker count: '") + w + "'");
        }
        config.workers = static_cast<std::size_t>(n);
    }
    if (const char* d = std::getenv("ANNEALSCALE_OUTPUT_DIR"); d && *d) config.output_dir = d;
    propagate(config);
}

}  // namespace annealscale

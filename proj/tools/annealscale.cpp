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

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "annealscale/chimera.hpp"
#include "annealscale/config.hpp"
#include "annealscale/ensemble.hpp"
#include "annealscale/oracle.hpp"
#include "annealscale/qubit.hpp"
#include "annealscale/samples.hpp"
#include "annealscale/scalefit.hpp"
#include "annealscale/table.hpp"

namespace fs = std::filesystem;
using namespace annealscale;
using nlohmann::json;

namespace {

enum Exit { ok = 0, config_error = 1, numerical_failure = 2, partial = 3 };

struct Context {
    RunConfig config;

    fs::path out(const std::string& name) const {
        fs::create_directories(config.output_dir);
        return fs::path(config.output_dir) / name;
    }

    void stamp(std::ostream& os) const {
        os << "# config_digest: " << config.digest << '\n';
        os << "# version: " << tool_version() << '\n';
    }
};

std::ofstream open_output(const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    return out;
}

void write_json(const fs::path& path, const json& doc) { open_output(path) << doc.dump(2) << '\n'; }

std::optional<Optimum> fitted_optimum(const PowerLawFit& fit, std::size_t i) {
    if (!(fit.a[i] > 0 && fit.b[i] > 0 && std::isfinite(fit.a[i]) && std::isfinite(fit.b[i]))) {
        return std::nullopt;
    }
    return optimum(fit, i);
}

json fit_json(const PowerLawFit& fit) {
    json j;
    j["alpha"] = fit.alpha;
    j["alpha_error"] = fit.alpha_error();
    j["beta"] = fit.beta;
    j["beta_error"] = fit.beta_error();
    j["chi2"] = fit.chi2;
    j["dof"] = fit.dof;
    j["iterations"] = fit.iterations;
    j["warnings"] = fit.warnings;
    j["sizes"] = json::array();
    for (std::size_t i = 0; i < fit.sizes.size(); ++i) {
        json size{{"L", fit.sizes[i]},
                  {"a", fit.a[i]},
                  {"a_error", fit.a_error(i)},
                  {"b", fit.b[i]},
                  {"b_error", fit.b_error(i)}};
        if (const auto opt = fitted_optimum(fit, i)) {
            size["v_min"] = opt->v_min;
            size["v_min_error"] = opt->v_min_error;
            size["f_min"] = opt->f_min;
            size["f_min_error"] = opt->f_min_error;
        }
        j["sizes"].push_back(size);
    }
    return j;
}

void print_fit(const std::string& label, const PowerLawFit& fit) {
    std::printf("%s: alpha = %.4f +- %.4f, beta = %.4f +- %.4f, chi2/dof = %.3g\n", label.c_str(),
                fit.alpha, fit.alpha_error(), fit.beta, fit.beta_error(), fit.chi2_per_dof());
    for (std::size_t i = 0; i < fit.sizes.size(); ++i) {
        std::printf("  L=%zu  a=%.5g  b=%.5g", fit.sizes[i], fit.a[i], fit.b[i]);
        if (const auto opt = fitted_optimum(fit, i)) {
            std::printf("  v_min=%.5g +- %.2g  f_min=%.5g +- %.2g\n", opt->v_min,
                        opt->v_min_error, opt->f_min, opt->f_min_error);
        } else {
            std::printf("  (no minimum)\n");
        }
    }
    for (const auto& w : fit.warnings) std::printf("  warning: %s\n", w.c_str());
}

struct Datasets {
    std::vector<std::vector<FitPoint>> points;
    std::vector<std::size_t> sizes;
};

Datasets load_datasets(const FitConfig& f) {
    if (f.input.empty()) throw ConfigError("no input table given (set input=...)");
    const auto table = read_curve_table(f.input);
    Datasets d;
    d.sizes = f.sizes.empty() ? table_sizes(table) : f.sizes;
    for (std::size_t L : d.sizes) d.points.push_back(select_points(table, L, f.observable, f.selection));
    return d;
}

void write_rescaled(const Context& ctx, const fs::path& path, const std::vector<std::size_t>& sizes,
                    const std::vector<std::vector<RescaledPoint>>& points) {
    auto out = open_output(path);
    out << "# annealscale rescaled v1\n";
    ctx.stamp(out);
    out << "L,u,g,sigma\n";
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        for (const auto& p : points[i]) {
            out << sizes[i] << ',' << format_double(p.u) << ',' << format_double(p.g) << ','
                << format_double(p.sigma) << '\n';
        }
    }
}

void write_master(const Context& ctx, const fs::path& path, double alpha, double beta) {
    auto out = open_output(path);
    out << "# annealscale master v1\n";
    ctx.stamp(out);
    out << "# alpha: " << format_double(alpha) << "\n# beta: " << format_double(beta) << '\n';
    out << "u,g\n";
    for (int k = -40; k <= 40; ++k) {
        const double u = std::pow(10.0, k / 20.0);
        out << format_double(u) << ',' << format_double(master_curve(u, alpha, beta)) << '\n';
    }
}

int verb_simulate(const Context& ctx) {
    const auto& s = ctx.config.simulate;
    SweepOutput output;
    output.path = ctx.out(s.output).string();
    output.config_digest = plan_digest(s.plan);
    output.resume = s.resume;
    output.notes = {"config " + ctx.config.digest, "version " + tool_version()};
    output.on_row = [](const CurveRow& row) {
        std::printf("L=%zu v=%s dE=%s +- %s\n", row.L, format_double(row.v).c_str(),
                    format_double(row.delta_e_mean).c_str(), format_double(row.delta_e_stderr).c_str());
        std::fflush(stdout);
    };
    const auto outcome = run_sweep(s.plan, output);
    std::printf("%zu computed, %zu reused, %zu failed -> %s\n", outcome.computed, outcome.reused,
                outcome.failures.size(), output.path.c_str());
    for (const auto& f : outcome.failures) {
        std::fprintf(stderr, "failed: L=%zu v=%s: %s\n", f.L, format_double(f.v).c_str(),
                     f.message.c_str());
    }
    if (outcome.failures.empty()) return ok;
    return outcome.table.rows.empty() ? numerical_failure : partial;
}

int verb_qubit(const Context& ctx) {
    const auto& q = ctx.config.qubit;
    if (q.split) {
        const auto est = coherence_with_split(q.run);
        std::printf("T_r = %.4g (halves %.4g, %.4g; split %.2f%%)\n", est.T_r, est.T_r_first,
                    est.T_r_second, 100.0 * est.relative_split());
        write_json(ctx.out(q.output + ".json"),
                   {{"config_digest", ctx.config.digest},
                    {"h_z", q.run.h_z},
                    {"realizations", 2 * q.run.n_realizations},
                    {"T_r", est.T_r},
                    {"T_r_first", est.T_r_first},
                    {"T_r_second", est.T_r_second}});
        return ok;
    }
    const auto curve = evolve_qubit(q.run);
    const auto path = ctx.out(q.output);
    {
        auto out = open_output(path);
        out << "# annealscale purity v1\n";
        ctx.stamp(out);
        out << "# h_z: " << format_double(q.run.h_z) << "\n# realizations: " << q.run.n_realizations
            << '\n';
        out << "t,purity,rho_uu,rho_dd,re_rho_ud,im_rho_ud\n";
        for (std::size_t i = 0; i < curve.t.size(); ++i) {
            const auto& r = curve.rho[i];
            out << format_double(curve.t[i]) << ',' << format_double(curve.purity[i]) << ','
                << format_double(r(0, 0).real()) << ',' << format_double(r(1, 1).real()) << ','
                << format_double(r(0, 1).real()) << ',' << format_double(r(0, 1).imag()) << '\n';
        }
    }
    try {
        std::printf("T_r = %.4g (h_z = %g, %zu realizations) -> %s\n", coherence_time(curve),
                    q.run.h_z, q.run.n_realizations, path.c_str());
    } catch (const HorizonError& e) {
        std::fprintf(stderr, "%s (purity %.4f at t_max); curve written to %s\n", e.what(),
                     e.final_purity(), path.c_str());
        return numerical_failure;
    }
    return ok;
}

int verb_fit(const Context& ctx) {
    const auto& f = ctx.config.fit;
    const auto data = load_datasets(f);
    json report;
    report["config_digest"] = ctx.config.digest;
    report["input"] = f.input;
    report["observable"] = f.observable == Observable::energy ? "energy" : "magnetization";
    report["per_size"] = json::array();
    std::vector<std::vector<RescaledPoint>> rescaled;
    for (std::size_t i = 0; i < data.sizes.size(); ++i) {
        const auto fit = fit_global({data.points[i]}, {data.sizes[i]}, f.options);
        auto j = fit_json(fit);
        report["per_size"].push_back(j);
        print_fit("L=" + std::to_string(data.sizes[i]), fit);
        const auto opt = fitted_optimum(fit, 0);
        rescaled.push_back(opt ? rescale(data.points[i], opt->v_min, opt->f_min)
                               : std::vector<RescaledPoint>{});
    }
    const auto global = fit_global(data.points, data.sizes, f.options);
    report["global"] = fit_json(global);
    print_fit("global", global);
    write_json(ctx.out(f.output + "-report.json"), report);
    write_rescaled(ctx, ctx.out(f.output + "-rescaled.csv"), data.sizes, rescaled);
    write_master(ctx, ctx.out(f.output + "-master.csv"), global.alpha, global.beta);
    return ok;
}

int verb_collapse(const Context& ctx) {
    const auto& f = ctx.config.collapse;
    const auto data = load_datasets(f);
    const auto result = collapse(data.points, data.sizes, f.options);
    std::vector<RescaledPoint> all;
    for (const auto& p : result.points) all.insert(all.end(), p.begin(), p.end());
    const auto master = fit_master(all, f.options);
    print_fit("collapse", result.fit);
    std::printf("master curve: alpha = %.4f +- %.4f, beta = %.4f +- %.4f\n", master.alpha,
                master.alpha_error, master.beta, master.beta_error);
    json report;
    report["config_digest"] = ctx.config.digest;
    report["input"] = f.input;
    report["global"] = fit_json(result.fit);
    report["master"] = {{"alpha", master.alpha},
                        {"alpha_error", master.alpha_error},
                        {"beta", master.beta},
                        {"beta_error", master.beta_error},
                        {"chi2", master.chi2},
                        {"dof", master.dof}};
    write_json(ctx.out(f.output + "-report.json"), report);
    write_rescaled(ctx, ctx.out(f.output + "-rescaled.csv"), data.sizes, result.points);
    write_master(ctx, ctx.out(f.output + "-master.csv"), result.alpha, result.beta);
    return ok;
}

int verb_kzm(const Context& ctx) {
    const auto& k = ctx.config.kzm;
    std::printf("kzm exponent: %.3f\n", kzm_exponent(k));
    std::printf("lzm exponent: %.3f\n", lzm_exponent(k.z));
    return ok;
}

chimera::Embedding configured_embedding(const EmbedConfig& c) {
    auto e = chimera::build_embedding(c.L, c.J_ising, c.defects, c.J_hc);
    if (c.gauge == "none") return e;
    std::vector<int> g(chimera::grid_side * chimera::grid_side, 1);
    std::mt19937_64 rng(c.gauge_seed);
    for (int y = 0; y < chimera::grid_side; ++y) {
        for (int x = 0; x < chimera::grid_side; ++x) {
            int& gi = g[y * chimera::grid_side + x];
            gi = c.gauge == "checkerboard" ? ((x + y) % 2 ? -1 : 1) : ((rng() & 1) ? -1 : 1);
        }
    }
    return chimera::gauge_transform(e, g);
}

int verb_embed(const Context& ctx) {
    const auto& c = ctx.config.embed;
    const auto e = configured_embedding(c);
    const auto couplers = ctx.out(c.output + ".couplers");
    {
        auto text = chimera::coupler_list_text(e);
        const auto first = text.find('\n') + 1;
        std::ostringstream stamp;
        ctx.stamp(stamp);
        text.insert(first, stamp.str());
        open_output(couplers) << text;
    }
    {
        auto out = open_output(ctx.out(c.output + "-sites.csv"));
        out << "# annealscale sites v1\n";
        ctx.stamp(out);
        out << "x,y,a,b,tile,vacancy,gauge,cell\n";
        for (const auto& s : e.sites) {
            const auto cell = chimera::coordinates(s.a);
            out << s.x << ',' << s.y << ',' << s.a << ',' << s.b << ',' << s.tile << ','
                << (s.vacancy ? 1 : 0) << ',' << s.gauge << ','
                << chimera::arrangement(cell.row, cell.col).label() << '\n';
        }
    }
    {
        auto out = open_output(ctx.out(c.output + "-tiles.csv"));
        out << "# annealscale tiles-layout v1\n";
        ctx.stamp(out);
        for (const auto& n : e.notes) out << "# note: " << n << '\n';
        out << "tile,x0,y0,side\n";
        for (const auto& t : e.tiles) {
            out << t.id << ',' << t.x0 << ',' << t.y0 << ',' << t.side << '\n';
        }
    }
    std::size_t vacancies = 0;
    for (const auto& s : e.sites) vacancies += s.tile >= 0 && s.vacancy;
    std::printf("L=%d: %zu tiles, %zu couplers (%zu high-cost, %zu intra-cell, %zu inter-cell), "
                "%zu vacancies -> %s\n",
                e.L, e.tiles.size(), e.couplers.size(), e.count(chimera::CouplerKind::high_cost),
                e.count(chimera::CouplerKind::intra_cell), e.count(chimera::CouplerKind::inter_cell),
                vacancies, couplers.c_str());
    for (const auto& n : e.notes) std::printf("note: %s\n", n.c_str());
    return ok;
}

int verb_decode(const Context& ctx) {
    const auto& d = ctx.config.decode;
    if (d.samples.empty()) throw ConfigError("no sample file given (set samples=...)");
    const auto e = d.couplers.empty() ? configured_embedding(ctx.config.embed)
                                      : chimera::read_coupler_list(d.couplers);
    const auto samples = chimera::read_samples(d.samples, d.annealing_time);
    const auto records = chimera::decode_samples(samples, e, d.options);
    const auto path = ctx.out(d.output);
    {
        auto out = open_output(path);
        std::ostringstream body;
        chimera::write_tile_table(body, records);
        auto text = body.str();
        const auto first = text.find('\n') + 1;
        std::ostringstream stamp;
        ctx.stamp(stamp);
        text.insert(first, stamp.str());
        out << text;
    }
    std::size_t excluded = 0, violations = 0;
    for (const auto& r : records) {
        excluded += r.excluded;
        violations += static_cast<std::size_t>(r.hc_violations);
    }
    std::printf("%zu runs x %zu tiles decoded, %zu excluded, %zu high-cost violations -> %s\n",
                samples.records.size(), e.tiles.size(), excluded, violations, path.c_str());
    return ok;
}

int verb_aggregate(const Context& ctx) {
    const auto& a = ctx.config.aggregate;
    if (a.input.empty()) throw ConfigError("no tile table given (set input=...)");
    std::ifstream in(a.input);
    if (!in) throw Error("cannot open '" + a.input + "'");
    auto table = chimera::aggregate_tiles(chimera::parse_tile_table(in, a.input), a.variant, a.bins);
    table.header.config_digest = ctx.config.digest;
    const auto path = ctx.out(a.output);
    write_curve_table(path.string(), table);
    for (const auto& r : table.rows) {
        std::printf("L=%zu v=%s dE=%s +- %s dM=%s +- %s (%zu tile runs)\n", r.L,
                    format_double(r.v).c_str(), format_double(r.delta_e_mean).c_str(),
                    format_double(r.delta_e_stderr).c_str(),
                    format_double(r.delta_m_mean.value_or(NAN)).c_str(),
                    format_double(r.delta_m_stderr.value_or(NAN)).c_str(), r.n_real);
    }
    return ok;
}

int verb_oracle(const Context& ctx) {
    const auto& o = ctx.config.oracle;
    SweepPlan plan;
    plan.noise = o.spectrum.coupling > 0.0 ? NoisePlacement::all_sites : NoisePlacement::none;
    plan.spectrum = o.spectrum;
    plan.master_seed = ctx.config.master_seed;
    double worst_residual = 0.0, worst_ground = 0.0;
    for (std::size_t L : o.sizes) {
        for (std::size_t r = 0; r < o.cases; ++r) {
            const auto c = compare_with_exact(L, o.T, r, plan);
            worst_residual = std::max(worst_residual, c.residual_gap());
            worst_ground = std::max(worst_ground, c.ground_gap());
            std::printf("L=%zu r=%zu residual bdg=%.12f exact=%.12f |diff|=%.2e ground |diff|=%.2e\n",
                        L, r, c.residual_bdg, c.residual_exact, c.residual_gap(), c.ground_gap());
        }
    }
    const bool pass = worst_residual <= o.tolerance && worst_ground <= 1e-10;
    std::printf("%s: largest residual difference %.2e (tolerance %.1e), ground %.2e\n",
                pass ? "agree" : "DISAGREE", worst_residual, o.tolerance, worst_ground);
    return pass ? ok : numerical_failure;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Noisy quantum-annealing scaling toolkit"};
    app.set_version_flag("--version", tool_version());
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::vector<std::string> overrides;
    std::string output_dir;
    int workers = -1;
    app.add_option("-c,--config", config_path, "YAML run configuration")->check(CLI::ExistingFile);
    app.add_option("--set", overrides, "Override a configuration key, e.g. simulate.sizes=[8,16]");
    app.add_option("-o,--output-dir", output_dir, "Directory for output files");
    app.add_option("-j,--workers", workers, "Worker threads (0: all cores)");

    struct Verb {
        const char* name;
        const char* section;
        const char* help;
        int (*run)(const Context&);
    };
    const std::vector<Verb> verbs = {
            {"simulate", "simulate", "Run an annealing sweep", verb_simulate},
            {"qubit", "qubit", "Single-qubit purity decay", verb_qubit},
            {"fit", "fit", "Power-law fits of a curve table", verb_fit},
            {"collapse", "collapse", "Global collapse onto the master curve", verb_collapse},
            {"kzm", "kzm", "Kibble-Zurek exponent prediction", verb_kzm},
            {"embed", "embed", "Chimera embedding and coupler list", verb_embed},
            {"decode", "decode", "Per-tile defects from sample files", verb_decode},
            {"aggregate", "aggregate", "Binned curve table from tile records", verb_aggregate},
            {"oracle-check", "oracle", "BdG against exact diagonalization", verb_oracle},
    };
    std::vector<std::vector<std::string>> local(verbs.size());
    std::vector<CLI::App*> subs;
    for (std::size_t i = 0; i < verbs.size(); ++i) {
        auto* sub = app.add_subcommand(verbs[i].name, verbs[i].help);
        sub->add_option("settings", local[i], std::string("key=value overrides of the '") +
                                                      verbs[i].section + "' section");
        subs.push_back(sub);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : config_error;
    }

    for (std::size_t i = 0; i < verbs.size(); ++i) {
        if (!subs[i]->parsed()) continue;
        try {
            auto all = overrides;
            for (const auto& s : local[i]) all.push_back(std::string(verbs[i].section) + "." + s);
            Context ctx;
            ctx.config = config_path.empty() ? load_config("", "<defaults>", all)
                                             : load_config_file(config_path, all);
            apply_environment(ctx.config);
            if (!output_dir.empty()) ctx.config.output_dir = output_dir;
            if (workers >= 0) {
                ctx.config.workers = static_cast<std::size_t>(workers);
                ctx.config.simulate.plan.workers = ctx.config.workers;
                ctx.config.qubit.run.workers = ctx.config.workers;
            }
            return verbs[i].run(ctx);
        } catch (const ConfigError& e) {
            std::fprintf(stderr, "configuration error: %s\n", e.what());
            return config_error;
        } catch (const FormatError& e) {
            std::fprintf(stderr, "input error: %s\n", e.what());
            return config_error;
        } catch (const ParameterError& e) {
            std::fprintf(stderr, "parameter error: %s\n", e.what());
            return config_error;
        } catch (const std::exception& e) {
            std::fprintf(stderr, "error: %s\n", e.what());
            return numerical_failure;
        }
    }
    return config_error;
}

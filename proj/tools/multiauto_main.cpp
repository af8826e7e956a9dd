#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <iostream>

#include "multiauto/catalogue.hpp"
#include "multiauto/config.hpp"
#include "multiauto/fixed_point.hpp"
#include "multiauto/pde.hpp"
#include "multiauto/report.hpp"

namespace ma = multiauto;
namespace fs = std::filesystem;

namespace {

constexpr const char* kVersion = "0.1.0";

std::string now_iso() {
    std::time_t t = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

struct Outputs {
    fs::path dir;
    std::vector<std::pair<std::string, std::size_t>> files;

    void write(const std::string& name, const std::string& content) {
        fs::create_directories(dir);
        ma::write_file((dir / name).string(), content);
        files.emplace_back(name, content.size());
    }
};

// experiment.paths = "b1 .. bn d1 .. dn; ..." -> decay rays (base, unit direction)
std::vector<ma::DecayPath> paths_from(const ma::Config& cfg, int dim) {
    std::vector<ma::DecayPath> out;
    if (!cfg.has("experiment", "paths")) return out;
    std::istringstream in(cfg.get("experiment", "paths"));
    std::string part;
    while (std::getline(in, part, ';')) {
        std::istringstream pin(part);
        std::vector<double> v;
        double x;
        while (pin >> x) v.push_back(x);
        if (v.empty()) continue;
        if (static_cast<int>(v.size()) != 2 * dim)
            throw ma::ConfigError("experiment.paths: each ray needs 2*dim numbers");
        ma::DecayPath p;
        p.base.assign(v.begin(), v.begin() + dim);
        p.dir.assign(v.begin() + dim, v.end());
        out.push_back(std::move(p));
    }
    return out;
}

ma::SampledGrid sample_function(const ma::ProbeFunction& f, const ma::GridWindow& w) {
    ma::SampledGrid g;
    g.window = w;
    g.values.resize(w.point_count());
    for (std::size_t i = 0; i < g.values.size(); ++i) {
        std::vector<double> t = w.point(i);
        g.values[i] = f.eval(t)[0];
    }
    return g;
}

int run_experiment(const std::string& config_path) {
    std::string text;
    ma::Config cfg;
    std::string kind;
    try {
        text = ma::read_file(config_path);
        cfg = ma::Config::parse(text);
        kind = cfg.get("experiment", "kind");
    } catch (const ma::Error& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }

    Outputs out;
    ma::RunManifest manifest;
    manifest.config_hash = ma::fnv1a_hex(cfg.print());
    manifest.version = kVersion;
    manifest.started = now_iso();

    bool verdict = false;
    try {
        out.dir = cfg.get_or("experiment", "output_dir", "out");
        auto seed = static_cast<std::uint64_t>(cfg.integer_or("experiment", "seed", 42));
        std::string expect = cfg.get_or("experiment", "expect", "pass");
        if (expect != "pass" && expect != "fail")
            throw ma::ConfigError("experiment.expect must be pass or fail");
        bool actual = false;

        if (kind == "aa_test") {
            ma::FunctionExpr f = function_from(cfg, "function");
            ma::LimitProbe probe = probe_from(cfg, "probe", "family");
            probe.seed = seed;
            ma::BochnerVerdict v = ma::bochner_test(ma::probe_fn(f), probe);
            out.write("verdict.json",
                      ma::verdict_json(cfg.get_or("function", "catalogue", "inline"), probe.family.describe(), v)
                              .dump(2) +
                          "\n");
            if (f.arity_time() == probe.window.dim)
                out.write("function.csv", ma::grid_csv(sample_function(ma::probe_fn(f), probe.window)));
            actual = v.passed;
        } else if (kind == "compactness") {
            ma::FunctionExpr f = function_from(cfg, "function");
            ma::LimitProbe probe = probe_from(cfg, "probe", "family");
            probe.seed = seed;
            ma::CompactReport r = ma::compactness_equivalence_check(ma::probe_fn(f), probe);
            out.write("compactness.json", ma::compact_json(r).dump(2) + "\n");
            actual = r.compact_pass;
        } else if (kind == "supremum") {
            ma::FunctionExpr f = function_from(cfg, "function");
            ma::SequenceFamily fam = family_from(cfg, "family");
            double a = cfg.num("experiment", "tail_start");
            double radius = cfg.num("experiment", "radius");
            double spacing = cfg.num_or("experiment", "spacing", 1e-3);
            ma::SupremumResult r = ma::supremum_formula_check(ma::probe_fn(f), fam, a, radius, spacing, seed);
            nlohmann::json j = {{"sup_all", r.sup_all}, {"sup_tail", r.sup_tail}, {"gap", r.gap}, {"seed", seed}};
            out.write("supremum.json", j.dump(2) + "\n");
            actual = r.gap <= cfg.num_or("experiment", "gap_tol", 1e-2);
        } else if (kind == "decompose") {
            ma::FunctionExpr f = function_from(cfg, "function");
            ma::SequenceFamily fam = family_from(cfg, "family");
            ma::DomainDescriptor dom = domain_from(cfg, "domain");
            ma::GridWindow w = window_from(cfg, "window");
            ma::DecomposeOptions opts;
            opts.min_translate_norm = cfg.num_or("experiment", "min_translate_norm", 50.0);
            opts.depth = static_cast<int>(cfg.integer_or("experiment", "depth", 16));
            if (cfg.has("experiment", "radii")) opts.radii = cfg.nums("experiment", "radii");
            opts.tol = cfg.num_or("experiment", "tol", 1e-2);
            opts.paths = paths_from(cfg, w.dim);
            ma::DecomposeResult r = ma::asymptotic_decompose(ma::probe_fn(f), fam, dom, w, opts, seed);
            out.write("decompose.json", ma::decompose_json(r).dump(2) + "\n");
            actual = r.decay_pass;
        } else if (kind == "convolve") {
            ma::KernelSpec k = kernel_from(cfg, "kernel");
            ma::FunctionExpr f = function_from(cfg, "function");
            ma::DomainDescriptor dom = domain_from(cfg, "domain");
            ma::GridWindow w = window_from(cfg, "window");
            ma::QuadratureScheme q = quad_from(cfg, "quadrature");
            ma::E1Report e1 = ma::verify_E1(k, q, {}, cfg.get_or("kernel", "use_abs", "false") == "true");
            ma::SampledGrid g = ma::gamma_apply(k, dom, ma::probe_fn(f), w, q);
            nlohmann::json j = {{"kernel_mass", e1.sup_estimate}, {"passed", e1.passed}, {"notes", e1.notes}};
            out.write("kernel.json", j.dump(2) + "\n");
            out.write("gamma.csv", ma::grid_csv(g));
            actual = e1.passed;
        } else if (kind == "solve_vie") {
            ma::FunctionExpr g = function_from(cfg, "g");
            ma::FunctionExpr h = function_from(cfg, "h");
            ma::KernelSpec k = kernel_from(cfg, "kernel");
            ma::GridWindow w = window_from(cfg, "window");
            ma::QuadratureScheme q = quad_from(cfg, "quadrature");
            double tol = cfg.num_or("experiment", "tol", 1e-6);
            ma::IterationTrace t = ma::solve_vie_infinite_delay(g, h, k, w, q, tol);
            out.write("trace.json", ma::trace_json(t, seed).dump(2) + "\n");
            out.write("solution.csv", ma::grid_csv(t.final));
            actual = t.residual <= cfg.num_or("experiment", "residual_tol", 1e-5);
        } else if (kind == "solve_vie_asymptotic") {
            ma::FunctionExpr g = function_from(cfg, "g");
            ma::FunctionExpr h = function_from(cfg, "h");
            ma::KernelSpec k = kernel_from(cfg, "kernel");
            ma::DomainDescriptor dom = domain_from(cfg, "domain");
            ma::GridWindow w = window_from(cfg, "window");
            ma::QuadratureScheme q = quad_from(cfg, "quadrature");
            ma::SequenceFamily fam = family_from(cfg, "family");
            ma::DecomposeOptions opts;
            opts.min_translate_norm = cfg.num_or("experiment", "min_translate_norm", 50.0);
            if (cfg.has("experiment", "radii")) opts.radii = cfg.nums("experiment", "radii");
            opts.tol = cfg.num_or("experiment", "tol_decay", 1e-2);
            opts.paths = paths_from(cfg, w.dim);
            double tol = cfg.num_or("experiment", "tol", 1e-6);
            ma::IterationTrace t = ma::solve_vie_asymptotic(g, h, k, dom, w, q, tol, fam, opts);
            out.write("trace.json", ma::trace_json(t, seed).dump(2) + "\n");
            out.write("solution.csv", ma::grid_csv(t.final));
            actual = t.has_asymptotic && t.asymptotic.decay_pass;
        } else if (kind == "solve_bikernel") {
            ma::FunctionExpr G = function_from(cfg, "G");
            ma::KernelSpec lam = kernel_from(cfg, "kernel");
            ma::GridWindow w = window_from(cfg, "window");
            ma::QuadratureScheme q = quad_from(cfg, "quadrature");
            double tol = cfg.num_or("experiment", "tol", 1e-6);
            ma::IterationTrace t = ma::solve_bikernel(G, lam, w, q, tol);
            out.write("trace.json", ma::trace_json(t, seed).dump(2) + "\n");
            out.write("solution.csv", ma::grid_csv(t.final));
            actual = t.residual <= cfg.num_or("experiment", "residual_tol", 1e-4);
        } else if (kind == "heat") {
            ma::HeatConfig hc;
            hc.dim = static_cast<int>(cfg.integer_or("experiment", "dim", 1));
            hc.time = cfg.num_or("experiment", "time", 1.0);
            hc.initial = function_from(cfg, "initial");
            hc.quadrature = quad_from(cfg, "quadrature");
            ma::GridWindow w = window_from(cfg, "window");
            out.write("solution.csv", ma::grid_csv(ma::heat_solve(hc, w)));
            if (cfg.has_section("family")) {
                ma::LimitProbe probe = probe_from(cfg, "probe", "family");
                probe.seed = seed;
                ma::HeatAaReport rep = ma::heat_preserves_aa_check(hc, probe);
                nlohmann::json j = {{"initial", ma::verdict_json("initial", probe.family.describe(), rep.initial)},
                                    {"solution", ma::verdict_json("solution", probe.family.describe(), rep.solution)},
                                    {"passed", rep.passed}};
                out.write("heat_aa.json", j.dump(2) + "\n");
                actual = rep.passed;
            } else {
                actual = true;
            }
        } else if (kind == "poisson") {
            ma::FunctionExpr u = function_from(cfg, "function");
            ma::LimitProbe probe = probe_from(cfg, "probe", "family");
            probe.seed = seed;
            ma::PoissonReport rep = ma::poisson_synthetic_check(u, probe, cfg.num_or("experiment", "h_fd", 1e-3));
            nlohmann::json j = {{"f_verdict", ma::verdict_json("laplacian", probe.family.describe(), rep.f_verdict)},
                                {"u_report", ma::compact_json(rep.u_report)},
                                {"fd_richardson", rep.fd_richardson},
                                {"passed", rep.passed},
                                {"notes", rep.notes}};
            out.write("poisson.json", j.dump(2) + "\n");
            actual = rep.passed;
        } else if (kind == "memory") {
            ma::MemorySystem sys = memory_system_from(cfg, "system");
            double t_max = cfg.num_or("experiment", "t_max", 5.0);
            double dt = cfg.num_or("experiment", "dt", 1e-3);
            ma::ResolventTable table = ma::build_resolvent(sys, t_max, dt);
            ma::PropertyRReport pr = ma::verify_property_R(table);
            nlohmann::json j = {{"M_est", pr.M_est},
                                {"delta_est", pr.delta_est},
                                {"passed", pr.passed},
                                {"worst_excess", pr.worst_excess},
                                {"halving_err", table.halving_err}};
            actual = pr.passed;
            if (cfg.has("experiment", "horizon")) {
                double horizon = cfg.num("experiment", "horizon");
                double tol = cfg.num_or("experiment", "tol", 1e-8);
                double rho = cfg.num_or("experiment", "rho", 1.0);
                ma::MildSolveResult sol = ma::solve_mild_nonlocal(sys, table, horizon, tol, rho);
                out.write("trace.json", ma::trace_json(sol.trace, seed).dump(2) + "\n");
                j["ball_gap"] = sol.ball_gap;
                j["ball_ok"] = sol.ball_ok;
                actual = actual && sol.ball_ok;
            }
            out.write("property_r.json", j.dump(2) + "\n");
            out.write("resolvent.csv", ma::resolvent_csv(table));
        } else {
            throw ma::ConfigError("unknown experiment kind: " + kind);
        }

        std::vector<std::string> leftover = cfg.unused();
        if (!leftover.empty()) {
            std::string msg = "unknown config keys:";
            for (const auto& k : leftover) msg += " " + k;
            throw ma::ConfigError(msg);
        }

        verdict = (expect == "pass") ? actual : !actual;
        manifest.verdict = verdict;
        manifest.finished = now_iso();
        manifest.files = out.files;
        ma::write_file((out.dir / "manifest.json").string(), manifest.to_json().dump(2) + "\n");
        if (!verdict) std::cerr << "verdict failed for experiment " << kind << "\n";
        return verdict ? 0 : 1;
    } catch (const ma::ParseError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const ma::ConfigError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const ma::DimensionMismatch& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const ma::MissingBound& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const ma::Error& e) {
        // numerical instability family: certificate, truncation, step, decay...
        std::cerr << e.what() << "\n";
        return 3;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"numerical toolkit for limit-property testing and certified integral-equation solving"};
    app.require_subcommand(1);

    std::string config_path;
    CLI::App* run = app.add_subcommand("run", "execute an experiment config");
    run->add_option("config", config_path, "path to the experiment config")->required();

    std::string filter;
    CLI::App* cat = app.add_subcommand("catalogue", "list built-in generator functions");
    cat->add_option("filter", filter, "substring filter");

    CLI::App* ver = app.add_subcommand("version", "print the toolkit version");

    CLI11_PARSE(app, argc, argv);

    if (ver->parsed()) {
        std::cout << kVersion << "\n";
        return 0;
    }
    if (cat->parsed()) {
        for (const auto& e : ma::catalogue()) {
            if (!filter.empty() && e.name.find(filter) == std::string::npos &&
                e.description.find(filter) == std::string::npos)
                continue;
            std::cout << e.name << " - " << e.description << "\n";
        }
        return 0;
    }
    return run_experiment(config_path);
}

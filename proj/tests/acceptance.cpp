// End-to-end acceptance suite. Each criterion prints exactly one PASS/FAIL
// line; the process exits nonzero if any criterion fails.
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <sys/wait.h>
#include <unsupported/Eigen/MatrixFunctions>

#include "multiauto/catalogue.hpp"
#include "multiauto/config.hpp"
#include "multiauto/fixed_point.hpp"
#include "multiauto/memory_material.hpp"
#include "multiauto/pde.hpp"
#include "multiauto/quadrature.hpp"
#include "multiauto/report.hpp"
#include "oracles.hpp"

using namespace multiauto;
namespace fs = std::filesystem;

namespace {

const double kSqrt2 = std::sqrt(2.0);
const double kPi = 3.14159265358979323846;

struct CheckFailure {
    std::string what;
};

void require(bool ok, const std::string& what) {
    if (!ok) throw CheckFailure{what};
}

int g_failures = 0;

void criterion(int n, const char* title, const std::function<void()>& body) {
    try {
        body();
        std::printf("criterion %2d: PASS  %s\n", n, title);
    } catch (const CheckFailure& f) {
        ++g_failures;
        std::printf("criterion %2d: FAIL  %s -- %s\n", n, title, f.what.c_str());
    } catch (const std::exception& e) {
        ++g_failures;
        std::printf("criterion %2d: FAIL  %s -- unexpected error: %s\n", n, title, e.what());
    }
    std::fflush(stdout);
}

// ---- shared probe families ----------------------------------------------

const std::vector<std::vector<double>>& joint_returns() {
    static const std::vector<std::vector<double>> el = [] {
        auto times = near_return_times({1.0, kSqrt2}, 8, 1e-3, 2e8);
        std::vector<std::vector<double>> v;
        for (double b : times) v.push_back({b});
        return v;
    }();
    return el;
}

const std::vector<std::vector<double>>& pi_returns() {
    static const std::vector<std::vector<double>> el = [] {
        auto times = near_return_times({1.0, kPi}, 8, 1e-3, 1e7);
        std::vector<std::vector<double>> v;
        for (double b : times) v.push_back({b});
        return v;
    }();
    return el;
}

LimitProbe probe_for(const std::vector<std::vector<double>>& returns) {
    LimitProbe p;
    p.family = SequenceFamily::explicit_list(returns);
    p.depth = 8;
    return p;
}

// ---- criterion bodies ----------------------------------------------------

void catalogue_discrimination() {
    // recurrent instances pass the two-limit test
    require(bochner_test(probe_fn(catalogue_get("sin_sqrt2").fn), probe_for(joint_returns())).passed,
            "sin_sqrt2 should pass");
    require(bochner_test(probe_fn(catalogue_get("sin_pi").fn), probe_for(pi_returns())).passed,
            "sin_pi should pass");

    {
        std::vector<std::vector<double>> el;
        for (const auto& b : joint_returns()) el.push_back({b[0], b[0]});
        LimitProbe p;
        p.family = SequenceFamily::explicit_list(el);
        p.depth = 8;
        p.window = GridWindow::cube(2, -5.0, 5.0, 9);
        require(bochner_test(probe_fn(catalogue_get("tensor").fn), p).passed, "tensor should pass");
    }
    {
        auto times = near_return_times({1.0}, 8, 1e-3, 1e6);
        std::vector<std::vector<double>> el;
        for (double b : times) el.push_back({b, b});
        LimitProbe p;
        p.family = SequenceFamily::explicit_list(el);
        p.depth = 8;
        p.window = GridWindow::cube(2, -5.0, 5.0, 9);
        p.state_set = BoundedSetSpec::ball({0.0}, 1.0, 4);
        require(bochner_test(probe_fn(catalogue_get("green_exp").fn), p).passed,
                "green_exp should pass");
    }

    // the unbounded line has no convergent translates at all
    {
        ScalarSource ar;
        ar.start = 10.0;
        ar.step = 10.0;
        LimitProbe p;
        p.family = SequenceFamily::diagonal(1, ar);
        bool failed = false;
        try {
            failed = !bochner_test(probe_fn(catalogue_get("linear_t").fn), p).passed;
        } catch (const NoConvergentSubsequence&) {
            failed = true;
        }
        require(failed, "linear_t should fail");
    }

    // the step function survives the forward limit but fails the backward one
    {
        ScalarSource drift;
        drift.start = 2.003;
        drift.step = 2.003;
        LimitProbe p;
        p.family = SequenceFamily::diagonal(1, drift);
        auto v = bochner_test(probe_fn(catalogue_get("step").fn), p);
        require(!v.passed, "step should fail");
    }

    // small-denominator oscillator: pointwise yes, uniform continuity no,
    // compact variant no
    auto rep = compactness_equivalence_check(probe_fn(catalogue_get("levitan").fn),
                                             probe_for(joint_returns()));
    require(rep.pointwise.passed, "levitan pointwise should pass");
    require(!rep.uc.passed, "levitan uniform continuity should fail");
    require(!rep.compact_pass, "levitan compact variant should fail");
    require(rep.agreement, "compact <-> pointwise && uniform continuity should agree");
}

void supremum_formula() {
    ScalarSource ar;
    ar.start = 10.0;
    ar.step = 10.0;
    auto res = supremum_formula_check(probe_fn(catalogue_get("sin_sqrt2").fn),
                                      SequenceFamily::diagonal(1, ar), 10.0, 200.0);
    require(res.gap <= 1e-2, "tail-supremum gap " + std::to_string(res.gap) + " > 1e-2");
}

void kernel_conditions() {
    QuadratureScheme q;
    for (auto [a, b] : {std::pair{1.0, 1.0}, std::pair{2.0, 0.5}}) {
        auto rep = verify_E1(KernelSpec::product_exponential({a, b}), q, {{0.0, 0.0}, {3.0, -1.0}});
        require(rep.passed, "integrability check should pass");
        require(std::abs(rep.sup_estimate - 1.0 / (a * b)) <= 1e-6,
                "orthant mass should be 1/(alpha beta)");
    }
    auto quadrant = verify_E2_E3(KernelSpec::product_exponential({1.0, 1.0}),
                                 DomainDescriptor::orthant({0.0, 0.0}, {1, 1}), q,
                                 {5.0, 10.0, 20.0, 40.0});
    require(quadrant.passed, "vanishing conditions should hold on the quadrant");
    auto degenerate = verify_E2_E3(
        KernelSpec::product_exponential({1.0, 1.0}),
        DomainDescriptor::custom(2, [](std::span<const double> t) { return t[0] == t[1]; }, false),
        q, {5.0, 10.0});
    require(degenerate.passed && degenerate.degenerate_interior,
            "measure-zero domain should be detected");
    for (const auto& row : degenerate.e3_integrals)
        for (double v : row) require(v == 0.0, "degenerate integrals must vanish identically");
}

void quadrant_counterexample() {
    KernelSpec k = KernelSpec::product_exponential({1.0, 1.0});
    DomainDescriptor quad = DomainDescriptor::orthant({0.0, 0.0}, {1, 1});
    ProbeFunction f;
    f.arity_time = 2;
    f.out_dim = 1;
    f.sup_bound = 2.0;
    f.fn = [](const double* t, const double*, double* out) {
        *out = 1.0 + std::exp(-t[0] - t[1]);
    };
    ScalarSource ar;
    ar.start = 60.0;
    ar.step = 30.0;
    DecomposeOptions opts;
    opts.radii = {10.0, 20.0, 40.0, 80.0};
    DecayPath ray; // abscissa fixed, ordinate to infinity
    ray.base = {1.0, 0.0};
    ray.dir = {0.0, 1.0};
    opts.paths = {ray};
    auto dec = gamma_asymptotic_check(k, quad, f, SequenceFamily::diagonal(2, ar),
                                      GridWindow::cube(2, 0.0, 5.0, 5), opts);
    require(!dec.decay_pass, "decaying-part verdict should FAIL for the counterexample");
    require(std::abs(dec.decay[0].back() - std::exp(-1.0)) <= 1e-2,
            "witness-ray remainder should be e^{-1} within 1e-2");
}

void volterra_contraction() {
    const FunctionExpr& g = catalogue_get("vie_forcing").fn;
    FunctionExpr h(2, 1,
                   {e_mul(e_const(0.1),
                          e_mul(e_mul(e_cos(e_time(0)), e_sin(e_time(1))),
                                e_ln(e_add(e_const(1.0), e_abs(e_state(0))))))});
    h.lipschitz_in_state = 0.1;
    KernelSpec k = KernelSpec::biexponential({1.0, 1.0});
    QuadratureScheme q;
    auto trace = solve_vie_infinite_delay(g, h, k, GridWindow::cube(2, -3.0, 3.0, 33), q, 1e-6);
    require(std::abs(trace.certificate.theta - 0.1) <= 1e-6, "certificate theta should be 0.1");
    require(trace.k_final <= 9, "should converge in at most 9 sweeps");
    require(!trace.sup_diffs.empty() && trace.sup_diffs.back() <= 1e-6 * 0.9,
            "final sweep difference should be below 9e-7");
    require(trace.residual <= 1e-5, "fixed-point residual should be below 1e-5");

    // independent dense-collocation reference on a coarser comparison grid
    oracles::Vie2dOracle oracle;
    oracle.lo_x = oracle.lo_y = -3.0;
    oracle.hi_x = oracle.hi_y = 3.0;
    oracle.g = [](double x, double y) {
        double osc = (std::sin(x) + std::sin(kPi * x)) * (std::cos(x) + std::cos(kPi * x));
        return osc + 1.0 / std::sqrt(1.0 + x * x + y * y);
    };
    oracle.h = [](double e1, double e2, double u) {
        return 0.1 * std::cos(e1) * std::sin(e2) * std::log1p(std::abs(u));
    };
    oracle.solve();
    double worst = 0.0;
    for (int i = 0; i <= 20; ++i)
        for (int j = 0; j <= 20; ++j) {
            double t[2] = {-3.0 + 0.3 * i, -3.0 + 0.3 * j}, v;
            trace.solution.fn(t, nullptr, &v);
            worst = std::max(worst, std::abs(v - oracle.at(t[0], t[1])));
        }
    require(worst <= 1e-4, "oracle disagreement " + std::to_string(worst) + " > 1e-4");

    // the fixed point passes the two-limit test along a convergent family
    ScalarSource geo;
    geo.kind = ScalarSource::Kind::Geometric;
    geo.start = 0.5;
    geo.step = 0.5;
    LimitProbe p;
    p.family = SequenceFamily::diagonal(2, geo);
    p.window = GridWindow::cube(2, -3.0, 2.0, 9);
    require(bochner_test(trace.solution, p).passed, "solution should pass the two-limit test");
}

void wave_reduction() {
    KernelSpec k;
    k.dim = 2;
    k.expr = FunctionExpr(
        2, 0, {e_neg(e_exp(e_neg(e_mul(e_const(0.5), e_add(e_time(0), e_time(1))))))});
    k.rates = {0.5, 0.5};
    FunctionExpr g(2, 0,
                   {e_sub(e_exp(e_neg(e_mul(e_const(0.5), e_time(0)))),
                          e_exp(e_neg(e_mul(e_const(0.5), e_time(1)))))});
    FunctionExpr h(2, 1,
                   {e_mul(e_const(0.05),
                          e_mul(e_cos(e_mul(e_const(0.5), e_sub(e_time(0), e_time(1)))),
                                e_sin(e_state(0))))});
    h.lipschitz_in_state = 0.05;
    QuadratureScheme q;
    ScalarSource ar;
    ar.start = 60.0;
    ar.step = 30.0;
    DecomposeOptions opts;
    DecayPath diag;
    diag.base = {0.0, 0.0};
    diag.dir = {1.0 / kSqrt2, 1.0 / kSqrt2};
    opts.paths = {diag};
    auto trace = solve_vie_asymptotic(g, h, k, DomainDescriptor::orthant({0.0, 0.0}, {1, 1}),
                                      GridWindow::cube(2, 0.0, 20.0, 33), q, 1e-6,
                                      SequenceFamily::diagonal(2, ar), opts);
    require(std::abs(trace.certificate.theta - 0.2) <= 1e-6, "certificate theta should be 0.2");
    require(trace.has_asymptotic && trace.asymptotic.decay_pass,
            "solution should pass the decaying-part test");
    double g_max = 0.0;
    for (const auto& row : trace.asymptotic.g_grid)
        for (double v : row) g_max = std::max(g_max, std::abs(v));
    require(g_max <= 1e-2, "recurrent-part residual should be below 1e-2");
}

void heat_properties() {
    // truncated fundamental-solution mass at t = 1
    HeatConfig cfg;
    cfg.dim = 1;
    cfg.time = 1.0;
    double R = cfg.truncation_radius();
    double mass = integrate_gl8(
        [](double xi) { return heat_kernel(std::span<const double>(&xi, 1), 1.0); }, -R, R, 2);
    require(mass >= 1.0 - 1e-6 && mass <= 1.0 + 1e-9, "kernel mass should be 1 within 1e-6");

    // pure tones damp by exactly e^{-omega^2 t}
    for (double omega : {1.0, kSqrt2}) {
        HeatConfig tone;
        tone.dim = 1;
        tone.time = 1.0;
        tone.initial = FunctionExpr(1, 0, {e_sin(e_mul(e_const(omega), e_time(0)))});
        tone.initial.sup_bound = 1.0;
        auto grid = heat_solve(tone, GridWindow::cube(1, -3.0, 3.0, 13));
        double damp = std::exp(-omega * omega);
        for (std::size_t i = 0; i < grid.window.point_count(); ++i) {
            double x = grid.window.point(i)[0];
            require(std::abs(grid.values[i] - damp * std::sin(omega * x)) <= 1e-6,
                    "tone damping should match e^{-omega^2 t} within 1e-6");
        }
    }

    // the convolution preserves the two-limit property for two-tone data
    HeatConfig aa;
    aa.dim = 1;
    aa.time = 1.0;
    aa.initial = catalogue_get("sin_sqrt2").fn;
    auto rep = heat_preserves_aa_check(aa, probe_for(joint_returns()));
    require(rep.passed, "heat image of two-tone data should pass the two-limit test");
}

void poisson_synthetic() {
    auto rep = poisson_synthetic_check(catalogue_get("sin_sqrt2").fn, probe_for(joint_returns()),
                                       1e-3);
    require(rep.f_verdict.passed, "finite-difference Laplacian should pass the two-limit test");
    require(rep.u_report.compact_pass, "potential should pass the compact variant");
    require(rep.passed, "joint verdict should pass");

    // stencil calibration: discrete Laplacian of x^2 is 2
    ExprPtr body = e_mul(e_time(0), e_time(0));
    const double hh = 1e-3;
    FunctionExpr second(
        1, 0,
        {e_div(e_add(e_sub(shift_time(body, 0, hh), e_mul(e_const(2.0), body)),
                     shift_time(body, 0, -hh)),
               e_const(hh * hh))});
    for (double x : {0.0, 1.37, -2.5})
        require(std::abs(second.eval1(x) - 2.0) <= 1e-5, "discrete Laplacian of x^2 should be 2");
}

void memory_material() {
    // memoryless diffusion block vs. the matrix exponential
    MemorySystem lap = MemorySystem::laplacian1d(8, 2.0);
    auto lap_table = build_resolvent(lap, 5.0, 1e-3);
    for (double t : {1.0, 2.5, 5.0}) {
        Eigen::MatrixXd exact = (t * lap.A).exp();
        require((lap_table.at(t) - exact).cwiseAbs().maxCoeff() <= 1e-6,
                "resolvent should match the matrix exponential within 1e-6");
    }

    // scalar memory system vs. the augmented-pair integration at t = 1
    MemorySystem sys;
    sys.dim = 1;
    sys.A = Eigen::MatrixXd::Constant(1, 1, -2.0);
    sys.profile = FunctionExpr(1, 0, {e_mul(e_const(0.5), e_exp(e_neg(e_time(0))))});
    sys.has_memory = true;
    sys.u0 = Eigen::VectorXd::Constant(1, 1.0);
    {
        double Rv = 1.0, w = 0.0;
        const double dt = 1e-4;
        auto f = [](double r, double ww, double& dr, double& dw) {
            dr = -2.0 * r - ww;
            dw = r - ww;
        };
        for (long i = 0; i < 10000; ++i) {
            double k1r, k1w, k2r, k2w, k3r, k3w, k4r, k4w;
            f(Rv, w, k1r, k1w);
            f(Rv + 0.5 * dt * k1r, w + 0.5 * dt * k1w, k2r, k2w);
            f(Rv + 0.5 * dt * k2r, w + 0.5 * dt * k2w, k3r, k3w);
            f(Rv + dt * k3r, w + dt * k3w, k4r, k4w);
            Rv += dt / 6.0 * (k1r + 2 * k2r + 2 * k3r + k4r);
            w += dt / 6.0 * (k1w + 2 * k2w + 2 * k3w + k4w);
        }
        auto table = build_resolvent(sys, 5.0, 5e-3);
        require(std::abs(table.at(1.0)(0, 0) - Rv) <= 1e-4,
                "scalar memory resolvent should match the augmented pair within 1e-4 at t=1");
    }

    // forced nonlocal problem: stability certificate and contraction behavior
    sys.f = FunctionExpr(
        1, 1,
        {e_mul(e_const(0.05),
               e_mul(e_add(e_sin(e_time(0)), e_sin(e_mul(e_const(kSqrt2), e_time(0)))),
                     e_atan(e_state(0))))});
    sys.has_forcing = true;
    sys.lip_f = 0.05;
    sys.g_nonlocal = [](const std::vector<Eigen::VectorXd>& traj) {
        double mean = 0.0;
        for (const auto& v : traj) mean += v(0);
        mean /= static_cast<double>(traj.size());
        return Eigen::VectorXd::Constant(1, 0.05 * std::clamp(mean, -1.0, 1.0));
    };
    sys.lip_g = 0.05;
    auto table = build_resolvent(sys, 15.0, 5e-3, /*require_decay=*/true);
    auto pr = verify_property_R(table);
    require(pr.passed && pr.delta_est > 0.0, "exponential-stability check should pass");
    const double tol = 1e-6;
    auto res = solve_mild_nonlocal(sys, table, 5.0, tol, 1.0);
    double theta = res.trace.certificate.theta;
    double ratio = estimate_observed_ratio(res.trace);
    require(ratio <= 1.1 * theta, "observed contraction ratio should be at most 1.1 theta");
    require(res.trace.residual <= tol / (1.0 - theta) + 1e-4,
            "mild-solution residual should satisfy the a-priori bound");
}

void closure_suite() {
    LimitProbe joint = probe_for(joint_returns());
    LimitProbe pip = probe_for(pi_returns());

    // linear combinations at the inflated tolerance
    for (auto [name, probe] : {std::pair<const char*, LimitProbe*>{"sin_sqrt2", &joint},
                               std::pair<const char*, LimitProbe*>{"sin_pi", &pip}}) {
        const FunctionExpr& f = catalogue_get(name).fn;
        const FunctionExpr& c = catalogue_get("constant").fn;
        FunctionExpr comb(1, 0,
                          {e_add(e_mul(e_const(0.5), f.components()[0]),
                                 e_mul(e_const(0.25), c.components()[0]))});
        LimitProbe q = *probe;
        q.tol_limit *= 0.75;
        q.tol_subseq *= 0.75;
        require(bochner_test(probe_fn(comb), q).passed,
                std::string("linear combination with ") + name + " should pass");
    }

    // translation invariance of the verdict
    const double tau = 7.3;
    for (auto [name, probe] : {std::pair<const char*, LimitProbe*>{"sin_sqrt2", &joint},
                               std::pair<const char*, LimitProbe*>{"sin_pi", &pip}}) {
        LimitProbe shifted = *probe;
        shifted.window = probe->window.translated(std::span<const double>(&tau, 1));
        require(bochner_test(probe_fn(catalogue_get(name).fn), shifted).passed,
                std::string("translated ") + name + " should pass");
    }

    // Lipschitz superposition
    FunctionExpr outer(1, 1, {e_mul(e_const(0.5), e_atan(e_state(0)))});
    outer.lipschitz_in_state = 0.5;
    for (auto [name, probe] : {std::pair<const char*, LimitProbe*>{"sin_sqrt2", &joint},
                               std::pair<const char*, LimitProbe*>{"sin_pi", &pip}}) {
        FunctionExpr w = make_nemytskii(outer, catalogue_get(name).fn);
        LimitProbe q = *probe;
        q.tol_limit *= 0.5;
        require(bochner_test(probe_fn(w), q).passed,
                std::string("superposition with ") + name + " should pass");
    }

    // whole-space convolution against an integrable kernel
    KernelSpec h = KernelSpec::biexponential({1.0});
    QuadratureScheme qs;
    for (auto [name, probe] : {std::pair<const char*, LimitProbe*>{"sin_sqrt2", &joint},
                               std::pair<const char*, LimitProbe*>{"sin_pi", &pip}}) {
        const FunctionExpr& f = catalogue_get(name).fn;
        ProbeFunction pf = probe_fn(f);
        ProbeFunction conv;
        conv.arity_time = 1;
        conv.out_dim = 1;
        conv.sup_bound = 2.0 * *f.sup_bound;
        conv.fn = [pf, h, qs](const double* t, const double*, double* out) {
            *out = whole_space_convolve(h, pf, std::span<const double>(t, 1), qs)[0];
        };
        LimitProbe q = *probe;
        q.tol_limit *= 2.0;
        q.tol_subseq *= 2.0;
        require(bochner_test(conv, q).passed,
                std::string("convolution image of ") + name + " should pass");
    }

    // uniform limits
    for (auto [name, probe] : {std::pair<const char*, LimitProbe*>{"sin_sqrt2", &joint},
                               std::pair<const char*, LimitProbe*>{"sin_pi", &pip}}) {
        const FunctionExpr& f = catalogue_get(name).fn;
        for (int j : {3, 5}) {
            double eps = std::pow(2.0, -j);
            FunctionExpr fj(1, 0,
                            {e_add(f.components()[0], e_mul(e_const(eps), e_sin(e_time(0))))});
            fj.sup_bound = *f.sup_bound + eps;
            LimitProbe q = *probe;
            q.tol_limit += 2.0 * eps;
            q.tol_subseq += 2.0 * eps;
            require(bochner_test(probe_fn(fj), q).passed, "approximants should pass");
        }
        LimitProbe q = *probe;
        q.tol_limit += 2.0 * std::pow(2.0, -3);
        q.tol_subseq += 2.0 * std::pow(2.0, -3);
        require(bochner_test(probe_fn(f), q).passed,
                std::string("uniform limit ") + name + " should pass");
    }
}

void reproducibility() {
    const std::string bin = MULTIAUTO_BIN;
    const std::string cfg = std::string(MULTIAUTO_CONFIG_DIR) + "/two_tone_limits.cfg";
    fs::path a = "acceptance_scratch/run_a", b = "acceptance_scratch/run_b";
    for (const fs::path& dir : {a, b}) {
        fs::remove_all(dir);
        fs::create_directories(dir);
        std::string cmd = "cd " + dir.string() + " && " + bin + " run " + cfg +
                          " >stdout.txt 2>stderr.txt";
        int status = std::system(cmd.c_str());
        require(status != -1 && WIFEXITED(status) && WEXITSTATUS(status) == 0,
                "bundled run should exit 0");
    }
    for (const char* f : {"verdict.json", "function.csv"}) {
        std::string fa = read_file((a / "out_two_tone_limits" / f).string());
        std::string fb = read_file((b / "out_two_tone_limits" / f).string());
        require(!fa.empty() && fa == fb,
                std::string(f) + " should be byte-identical across repeated runs");
    }
}

} // namespace

int main() {
    criterion(1, "catalogue discrimination by the two-limit test", catalogue_discrimination);
    criterion(2, "tail supremum equals the global supremum", supremum_formula);
    criterion(3, "kernel integrability and vanishing conditions", kernel_conditions);
    criterion(4, "quadrant counterexample fails the decay verdict", quadrant_counterexample);
    criterion(5, "certified contraction solve of the delay equation", volterra_contraction);
    criterion(6, "wave reduction decays along interior rays", wave_reduction);
    criterion(7, "heat convolution: mass, damping, limit preservation", heat_properties);
    criterion(8, "synthetic elliptic direction check", poisson_synthetic);
    criterion(9, "memory-material resolvent and mild solve", memory_material);
    criterion(10, "closure suite: combination/translation/superposition/convolution/limit",
              closure_suite);
    criterion(11, "byte-identical outputs for identical config and seed", reproducibility);

    if (g_failures > 0) {
        std::printf("%d criterion(s) FAILED\n", g_failures);
        return 1;
    }
    std::printf("all 11 criteria PASSED\n");
    return 0;
}

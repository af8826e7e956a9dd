#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "multiauto/catalogue.hpp"
#include "multiauto/sequence_limits.hpp"
#include "multiauto/volterra.hpp"

using namespace multiauto;

namespace {

const double kSqrt2 = std::sqrt(2.0);
const double kPi = 3.14159265358979323846;

// common near-return times of the tones 1 and sqrt2
const std::vector<std::vector<double>>& joint_returns() {
    static const std::vector<std::vector<double>> el = [] {
        auto times = near_return_times({1.0, kSqrt2}, 8, 1e-3, 2e8);
        std::vector<std::vector<double>> v;
        for (double b : times) v.push_back({b});
        return v;
    }();
    return el;
}

// common near-return times of the tones 1 and pi
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

FunctionExpr lin_comb(double a, const FunctionExpr& f, double b, const FunctionExpr& g) {
    FunctionExpr out(f.arity_time(), 0,
                     {e_add(e_mul(e_const(a), f.components()[0]),
                            e_mul(e_const(b), g.components()[0]))});
    if (f.sup_bound && g.sup_bound)
        out.sup_bound = std::abs(a) * *f.sup_bound + std::abs(b) * *g.sup_bound;
    return out;
}

} // namespace

TEST_CASE("linear combinations of passing instances pass at the inflated tolerance") {
    struct Case {
        const char* f;
        const char* g;
        double a, b;
        const std::vector<std::vector<double>>& returns;
    } cases[] = {
        {"sin_sqrt2", "constant", 0.5, 0.25, joint_returns()},
        {"sin_pi", "constant", 1.0, -0.5, pi_returns()},
    };
    for (const auto& cs : cases) {
        CAPTURE(cs.f);
        LimitProbe p = probe_for(cs.returns);
        const FunctionExpr& f = catalogue_get(cs.f).fn;
        const FunctionExpr& g = catalogue_get(cs.g).fn;
        // premises: both summands pass on their own
        CHECK(bochner_test(probe_fn(f), p).passed);
        CHECK(bochner_test(probe_fn(g), p).passed);
        // conclusion at tolerance |a| tol + |b| tol
        LimitProbe q = p;
        q.tol_limit = (std::abs(cs.a) + std::abs(cs.b)) * p.tol_limit;
        q.tol_subseq = (std::abs(cs.a) + std::abs(cs.b)) * p.tol_subseq;
        auto v = bochner_test(probe_fn(lin_comb(cs.a, f, cs.b, g)), q);
        CHECK(v.passed);
    }
}

TEST_CASE("verdicts are invariant under a fixed probe-window shift") {
    struct Case {
        const char* name;
        const std::vector<std::vector<double>>& returns;
    } cases[] = {
        {"sin_sqrt2", joint_returns()},
        {"sin_pi", pi_returns()},
    };
    const double tau = 7.3;
    for (const auto& cs : cases) {
        CAPTURE(cs.name);
        LimitProbe p = probe_for(cs.returns);
        auto base = bochner_test(probe_fn(catalogue_get(cs.name).fn), p);
        LimitProbe shifted = p;
        shifted.window = p.window.translated(std::span<const double>(&tau, 1));
        auto moved = bochner_test(probe_fn(catalogue_get(cs.name).fn), shifted);
        CHECK(base.passed);
        CHECK(moved.passed == base.passed);
    }
}

TEST_CASE("superposition with a Lipschitz outer map preserves the verdict") {
    // outer map 1/2 atan(x): 1/2-Lipschitz, time-independent
    FunctionExpr outer(1, 1, {e_mul(e_const(0.5), e_atan(e_state(0)))});
    outer.lipschitz_in_state = 0.5;
    outer.sup_bound = 0.25 * kPi;
    struct Case {
        const char* inner;
        const std::vector<std::vector<double>>& returns;
    } cases[] = {
        {"sin_sqrt2", joint_returns()},
        {"sin_pi", pi_returns()},
    };
    for (const auto& cs : cases) {
        CAPTURE(cs.inner);
        LimitProbe p = probe_for(cs.returns);
        const FunctionExpr& inner = catalogue_get(cs.inner).fn;
        CHECK(bochner_test(probe_fn(inner), p).passed);
        FunctionExpr w = make_nemytskii(outer, inner);
        // inflated tolerance L_outer * tol_inner + tol_outer (outer is static)
        LimitProbe q = p;
        q.tol_limit = 0.5 * p.tol_limit + 1e-12;
        auto v = bochner_test(probe_fn(w), q);
        CHECK(v.passed);
        // identity outer reproduces the inner exactly
        FunctionExpr ident(1, 1, {e_state(0)});
        FunctionExpr same = make_nemytskii(ident, inner);
        for (double t : {0.0, 1.3, -2.7})
            CHECK(same.eval1(t) == doctest::Approx(inner.eval1(t)).epsilon(1e-12));
    }
}

TEST_CASE("whole-space convolution with an integrable kernel preserves the verdict") {
    KernelSpec h = KernelSpec::biexponential({1.0}); // e^{-|r|}, mass 2
    QuadratureScheme q;
    struct Case {
        const char* name;
        double w2; // second tone frequency
        const std::vector<std::vector<double>>& returns;
    } cases[] = {
        {"sin_sqrt2", kSqrt2, joint_returns()},
        {"sin_pi", kPi, pi_returns()},
    };
    for (const auto& cs : cases) {
        CAPTURE(cs.name);
        const FunctionExpr& f = catalogue_get(cs.name).fn;
        ProbeFunction pf = probe_fn(f);
        ProbeFunction conv;
        conv.arity_time = 1;
        conv.out_dim = 1;
        conv.sup_bound = 2.0 * *f.sup_bound;
        conv.fn = [pf, h, q](const double* t, const double*, double* out) {
            *out = whole_space_convolve(h, pf, std::span<const double>(t, 1), q)[0];
        };
        // closed form: e^{-|r|} * sin(w t) = (2/(1+w^2)) sin(w t)
        for (double t : {0.0, 0.9, -2.2}) {
            double expect = 2.0 / 2.0 * std::sin(t) + 2.0 / (1.0 + cs.w2 * cs.w2) * std::sin(cs.w2 * t);
            CHECK(conv.eval1(t) == doctest::Approx(expect).epsilon(1e-6));
        }
        // verdict preserved at kernel-mass-inflated tolerance
        LimitProbe p = probe_for(cs.returns);
        p.tol_limit *= 2.0;
        p.tol_subseq *= 2.0;
        auto v = bochner_test(conv, p);
        CHECK(v.passed);
    }
}

TEST_CASE("uniform limits of passing sequences pass") {
    struct Case {
        const char* target;
        const std::vector<std::vector<double>>& returns;
    } cases[] = {
        {"sin_sqrt2", joint_returns()},
        {"sin_pi", pi_returns()},
    };
    for (const auto& cs : cases) {
        CAPTURE(cs.target);
        LimitProbe p = probe_for(cs.returns);
        const FunctionExpr& f = catalogue_get(cs.target).fn;
        double prev_gap = 1.0;
        for (int j : {3, 5, 7}) {
            // f_j = f + 2^{-j} sin t: uniform gap 2^{-j}, decreasing
            double eps = std::pow(2.0, -j);
            FunctionExpr fj(1, 0,
                            {e_add(f.components()[0], e_mul(e_const(eps), e_sin(e_time(0))))});
            fj.sup_bound = *f.sup_bound + eps;
            LimitProbe q = p;
            q.tol_limit = p.tol_limit + 2.0 * eps;
            q.tol_subseq = p.tol_subseq + 2.0 * eps;
            CHECK(bochner_test(probe_fn(fj), q).passed);
            CHECK(eps < prev_gap);
            prev_gap = eps;
        }
        // the uniform limit passes at tol + 2 sup_j gap
        LimitProbe q = p;
        q.tol_limit = p.tol_limit + 2.0 * std::pow(2.0, -3);
        q.tol_subseq = p.tol_subseq + 2.0 * std::pow(2.0, -3);
        CHECK(bochner_test(probe_fn(f), q).passed);
    }
}

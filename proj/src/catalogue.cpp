#include "multiauto/catalogue.hpp"

#include <cmath>

#include "multiauto/errors.hpp"

namespace multiauto {

FunctionExpr make_green_kernel(const FunctionExpr& phi, double M, double delta, int state_dim) {
    if (phi.arity_time() != 1 || phi.out_dim() != 1)
        throw DimensionMismatch("green kernel generator needs scalar phi(t)");
    if (!phi.sup_bound) throw MissingBound("phi lacks sup_bound");
    // exponent: int_s^t phi(tau) dtau, bounds in (t, s) = (t0, t1)
    ExprPtr phi_body = substitute_time(phi.components()[0], {e_bound(0)});
    ExprPtr exp_int = e_exp(e_node(Op::Integral, {phi_body, e_time(1), e_time(0)}));
    // surrogate semigroup factor, decaying for t >= s
    ExprPtr semi = e_mul(e_const(M), e_exp(e_neg(e_mul(e_const(delta), e_max(e_sub(e_time(0), e_time(1)), e_const(0.0))))));
    ExprPtr factor = e_mul(exp_int, semi);
    std::vector<ExprPtr> comps;
    comps.reserve(state_dim);
    for (int i = 0; i < state_dim; ++i) comps.push_back(e_mul(factor, e_state(i)));
    return FunctionExpr(2, state_dim, std::move(comps));
}

FunctionExpr make_tensor_product(const std::vector<FunctionExpr>& fs, const std::vector<FunctionExpr>& gs) {
    if (fs.empty() || gs.empty()) throw EmptyList("tensor product of empty factor list");
    int n = fs[0].arity_time(), m = gs[0].arity_time();
    for (const auto& f : fs)
        if (f.arity_time() != n || f.out_dim() != 1 || f.arity_state() != 0)
            throw DimensionMismatch("tensor factors must be scalar with shared time arity");
    for (const auto& g : gs)
        if (g.arity_time() != m || g.out_dim() != 1 || g.arity_state() != 0)
            throw DimensionMismatch("tensor factors must be scalar with shared time arity");
    std::vector<ExprPtr> shifted_g(m);
    std::vector<ExprPtr> g_vars(m);
    for (int j = 0; j < m; ++j) g_vars[j] = e_time(n + j);
    std::vector<ExprPtr> comps;
    comps.reserve(fs.size() * gs.size());
    for (const auto& f : fs)
        for (const auto& g : gs)
            comps.push_back(e_mul(f.components()[0], substitute_time(g.components()[0], g_vars)));
    FunctionExpr out(n + m, 0, std::move(comps));
    if (fs[0].sup_bound) {
        double bf = 0, bg = 0;
        bool ok = true;
        for (const auto& f : fs) {
            if (!f.sup_bound) ok = false;
            else bf = std::max(bf, *f.sup_bound);
        }
        for (const auto& g : gs) {
            if (!g.sup_bound) ok = false;
            else bg = std::max(bg, *g.sup_bound);
        }
        if (ok) out.sup_bound = bf * bg;
    }
    return out;
}

FunctionExpr make_nemytskii(const FunctionExpr& g_outer, const FunctionExpr& f_inner) {
    if (f_inner.out_dim() != g_outer.arity_state())
        throw DimensionMismatch("inner out_dim != outer state arity");
    if (f_inner.arity_time() != g_outer.arity_time())
        throw DimensionMismatch("inner/outer time arity differ");
    std::vector<ExprPtr> comps;
    comps.reserve(g_outer.out_dim());
    for (const auto& c : g_outer.components())
        comps.push_back(substitute_state(c, f_inner.components()));
    FunctionExpr w(g_outer.arity_time(), f_inner.arity_state(), std::move(comps));
    if (g_outer.lipschitz_in_state && f_inner.lipschitz_in_state)
        w.lipschitz_in_state = *g_outer.lipschitz_in_state * *f_inner.lipschitz_in_state;
    return w;
}

FunctionExpr scalar_fn(ExprPtr body, int arity_time, int arity_state) {
    return FunctionExpr(arity_time, arity_state, {std::move(body)});
}

FunctionExpr sine_sum(const std::vector<double>& freqs, const std::vector<double>& coeffs) {
    if (freqs.empty() || freqs.size() != coeffs.size()) throw EmptyList("sine_sum spec");
    std::vector<ExprPtr> terms;
    double bound = 0;
    for (std::size_t i = 0; i < freqs.size(); ++i) {
        terms.push_back(e_mul(e_const(coeffs[i]), e_sin(e_mul(e_const(freqs[i]), e_time(0)))));
        bound += std::abs(coeffs[i]);
    }
    ExprPtr body = terms[0];
    for (std::size_t i = 1; i < terms.size(); ++i) body = e_add(body, terms[i]);
    FunctionExpr f(1, 0, {body});
    f.sup_bound = bound;
    double lip = 0; // in time, recorded for reference only
    for (std::size_t i = 0; i < freqs.size(); ++i) lip += std::abs(coeffs[i] * freqs[i]);
    (void)lip;
    return f;
}

namespace {

const double kSqrt2 = std::sqrt(2.0);

ExprPtr levitan_body(ExprPtr tvar) {
    // sin(1 / (2 + cos t + cos sqrt2 t))
    return e_sin(e_div(e_const(1.0),
                       e_node(Op::Add, {e_const(2.0), e_cos(tvar), e_cos(e_mul(e_const(kSqrt2), tvar))})));
}

std::vector<CatalogueEntry> build_catalogue() {
    std::vector<CatalogueEntry> cat;

    {
        FunctionExpr f = sine_sum({1.0, kSqrt2}, {1.0, 1.0});
        cat.push_back({"sin_sqrt2", "sin t + sin(sqrt2 t): almost automorphic with incommensurate tones", f});
    }
    {
        FunctionExpr f = sine_sum({1.0, 3.14159265358979323846}, {1.0, 1.0});
        cat.push_back({"sin_pi", "sin t + sin(pi t): almost automorphic with incommensurate tones", f});
    }
    {
        FunctionExpr f = scalar_fn(levitan_body(e_time(0)));
        f.sup_bound = 1.0;
        cat.push_back({"levitan",
                       "Levitan's function sin(1/(2+cos t+cos sqrt2 t)): almost automorphic but not "
                       "uniformly continuous",
                       f});
    }
    {
        FunctionExpr f = scalar_fn(levitan_body(e_floor(e_time(0))));
        f.sup_bound = 1.0;
        cat.push_back({"levitan_floor",
                       "piecewise-constant Levitan variant on floor(t): Z-almost automorphic", f});
    }
    {
        FunctionExpr f = scalar_fn(e_const(1.0));
        f.sup_bound = 1.0;
        cat.push_back({"constant", "constant 1", f});
    }
    {
        FunctionExpr f = scalar_fn(e_time(0));
        cat.push_back({"linear_t", "f(t) = t: unbounded, not almost automorphic", f});
    }
    {
        // parity of floor(t): sign-like step, +-1
        ExprPtr fl = e_floor(e_time(0));
        ExprPtr parity = e_sub(fl, e_mul(e_const(2.0), e_floor(e_mul(e_const(0.5), e_time(0)))));
        FunctionExpr f = scalar_fn(e_sub(e_mul(e_const(2.0), parity), e_const(1.0)));
        f.sup_bound = 1.0;
        cat.push_back({"step", "sign-like step from floor parity: bounded, no convergent translates", f});
    }
    {
        FunctionExpr phi = scalar_fn(e_cos(e_time(0)));
        phi.sup_bound = 1.0;
        FunctionExpr g = make_green_kernel(phi, 1.0, 2.0);
        cat.push_back({"green_exp",
                       "bi-almost-automorphic evolution kernel e^{int_s^t cos} e^{-2(t-s)} x", g});
    }
    {
        FunctionExpr s1 = scalar_fn(e_sin(e_time(0)));
        s1.sup_bound = 1.0;
        FunctionExpr c1 = scalar_fn(e_cos(e_time(0)));
        c1.sup_bound = 1.0;
        FunctionExpr s2 = scalar_fn(e_sin(e_mul(e_const(kSqrt2), e_time(0))));
        s2.sup_bound = 1.0;
        FunctionExpr c2 = scalar_fn(e_cos(e_mul(e_const(kSqrt2), e_time(0))));
        c2.sup_bound = 1.0;
        FunctionExpr t = make_tensor_product({s1, c1}, {s2, c2});
        cat.push_back({"tensor", "2x2 tensor product (sin t, cos t) x (sin sqrt2 s, cos sqrt2 s)", t});
    }
    {
        // the worked forcing term g(x,y) = [sin x + sin pi x][cos x + cos pi x] + 1/sqrt(1+x^2+y^2)
        const double pi = 3.14159265358979323846;
        ExprPtr x = e_time(0), y = e_time(1);
        ExprPtr osc = e_mul(e_add(e_sin(x), e_sin(e_mul(e_const(pi), x))),
                            e_add(e_cos(x), e_cos(e_mul(e_const(pi), x))));
        ExprPtr tail = e_div(e_const(1.0), e_sqrt(e_node(Op::Add, {e_const(1.0), e_mul(e_time(0), e_time(0)),
                                                                   e_mul(e_time(1), e_time(1))})));
        FunctionExpr g(2, 0, {e_add(osc, tail)});
        g.sup_bound = 5.0;
        cat.push_back({"vie_forcing", "oscillatory product forcing plus decaying tail on R^2", g});
    }
    {
        FunctionExpr k(2, 0, {e_exp(e_neg(e_add(e_abs(e_time(0)), e_abs(e_time(1)))))});
        k.sup_bound = 1.0;
        cat.push_back({"kernel_biexp", "convolution kernel e^{-|r1|-|r2|}", k});
    }
    return cat;
}

} // namespace

const std::vector<CatalogueEntry>& catalogue() {
    static const std::vector<CatalogueEntry> cat = build_catalogue();
    return cat;
}

const CatalogueEntry& catalogue_get(const std::string& name) {
    for (const auto& e : catalogue())
        if (e.name == name) return e;
    throw ConfigError("no catalogue entry named '" + name + "'");
}

} // namespace multiauto

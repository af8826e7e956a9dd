#include "multiauto/fixed_point.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "multiauto/parallel.hpp"
#include "multiauto/quadrature.hpp"

namespace multiauto {

namespace {

// --- interpolation -------------------------------------------------------

// Cubic Lagrange on the 4-point stencil {-1,0,1,2} around the query cell.
inline double cubic4(double p0, double p1, double p2, double p3, double u) {
    double a = -u * (u - 1.0) * (u - 2.0) / 6.0;
    double b = (u + 1.0) * (u - 1.0) * (u - 2.0) / 2.0;
    double c = -(u + 1.0) * u * (u - 2.0) / 2.0;
    double d = (u + 1.0) * u * (u - 1.0) / 6.0;
    return a * p0 + b * p1 + c * p2 + d * p3;
}

struct Grid1 {
    double x0 = 0, h = 1;
    int n = 0;
    int comps = 1;
    std::vector<double> a; // n * comps, node-major

    double interp(double x, int c) const {
        double xm = x0 + (n - 1) * h;
        x = std::clamp(x, x0, xm); // boundary clamp closure
        int i = static_cast<int>(std::floor((x - x0) / h));
        i = std::clamp(i, 1, n - 3);
        double u = (x - x0) / h - i;
        auto v = [&](int k) { return a[static_cast<std::size_t>(k) * comps + c]; };
        return cubic4(v(i - 1), v(i), v(i + 1), v(i + 2), u);
    }
};

struct Grid2 {
    double x0 = 0, y0 = 0, h = 1;
    int nx = 0, ny = 0;
    std::vector<double> a; // nx * ny, x-major

    double at(int i, int j) const { return a[static_cast<std::size_t>(i) * ny + j]; }
    double interp(double x, double y) const {
        x = std::clamp(x, x0, x0 + (nx - 1) * h);
        y = std::clamp(y, y0, y0 + (ny - 1) * h);
        int i = std::clamp(static_cast<int>(std::floor((x - x0) / h)), 1, nx - 3);
        int j = std::clamp(static_cast<int>(std::floor((y - y0) / h)), 1, ny - 3);
        double ux = (x - x0) / h - i, uy = (y - y0) / h - j;
        double rows[4];
        for (int r = -1; r <= 2; ++r)
            rows[r + 1] = cubic4(at(i + r, j - 1), at(i + r, j), at(i + r, j + 1), at(i + r, j + 2), uy);
        return cubic4(rows[0], rows[1], rows[2], rows[3], ux);
    }
};

// --- exponential-weighted recursion --------------------------------------

// Running integral A_i = int_{start}^{x_i} e^{-alpha (x_i - eta)} w(eta) deta
// advanced one cell at a time: A_i = e^{-alpha h} A_{i-1} + local cell
// integral. The cell integral uses the cubic interpolant of w on the four
// trailing nodes against the exact exponential weight, so the scheme is
// uniformly 4th order; the first two cells fall back to lower order (their
// error is damped by e^{-alpha * distance} before it can reach the window).
struct Ladder {
    double decay;
    double w4[4], w3[3], w2[2];

    Ladder(double alpha, double h) : decay(std::exp(-alpha * h)) {
        auto weights = [&](int k, double* out) {
            for (int j = 0; j < k; ++j) {
                auto basis = [&](double s) {
                    double num = 1.0, den = 1.0;
                    for (int m = 0; m < k; ++m) {
                        if (m == j) continue;
                        num *= s - m * h;
                        den *= (j - m) * h;
                    }
                    return std::exp(-alpha * s) * num / den;
                };
                out[j] = integrate_gl8(basis, 0.0, h, 1);
            }
        };
        weights(4, w4);
        weights(3, w3);
        weights(2, w2);
    }

    // w and A indexed with the given stride; A[0] = 0.
    void apply(const double* w, double* A, int n, std::ptrdiff_t stride) const {
        auto W = [&](int i) { return w[i * stride]; };
        A[0] = 0.0;
        if (n > 1) A[stride] = decay * A[0] + w2[0] * W(1) + w2[1] * W(0);
        if (n > 2) A[2 * stride] = decay * A[stride] + w3[0] * W(2) + w3[1] * W(1) + w3[2] * W(0);
        for (int i = 3; i < n; ++i)
            A[i * stride] = decay * A[(i - 1) * stride] + w4[0] * W(i) + w4[1] * W(i - 1) +
                            w4[2] * W(i - 2) + w4[3] * W(i - 3);
    }
};

struct SepKernel {
    double alpha, beta, scale;
};

// The O(grid) sweeps require k(r) = scale * e^{-alpha r1 - beta r2} on the
// positive orthant; checked numerically, not assumed.
SepKernel require_separable(const KernelSpec& k) {
    if (k.dim != 2 || k.decay != KernelSpec::Decay::Exponential || k.rates.size() != 2)
        throw ConfigError("solver needs a 2D separable exponential kernel with declared rates");
    SepKernel s{k.rates[0], k.rates[1], 0.0};
    double zero[2] = {0.0, 0.0};
    s.scale = k.eval(std::span<const double>(zero, 2));
    const double pts[3][2] = {{0.4, 1.3}, {2.2, 0.6}, {5.0, 3.5}};
    for (const auto& p : pts) {
        double model = s.scale * std::exp(-s.alpha * p[0] - s.beta * p[1]);
        if (std::abs(k.eval(std::span<const double>(p, 2)) - model) > 1e-9 * (std::abs(s.scale) + 1.0))
            throw ConfigError("kernel is not a separable exponential; the fast sweeps do not apply");
    }
    return s;
}

// Two-stage tensor recursion: V approximates the cone integral of
// e^{-alpha r1 - beta r2} w over [start, t].
void apply_sep2(const Ladder& lx, const Ladder& ly, const std::vector<double>& w, int nx, int ny,
                std::vector<double>& A, std::vector<double>& V) {
    parallel_for(static_cast<std::size_t>(ny), [&](std::size_t j) {
        lx.apply(w.data() + j, A.data() + j, nx, ny);
    });
    parallel_for(static_cast<std::size_t>(nx), [&](std::size_t i) {
        ly.apply(A.data() + i * ny, V.data() + i * ny, ny, 1);
    });
}

int max_sweeps(double theta, double target, double d0) {
    if (!(d0 > target)) return 3;
    if (theta <= 0.0) return 5;
    int k = static_cast<int>(std::ceil(std::log(target / d0) / std::log(theta))) + 10;
    return std::min(500, std::max(5, k));
}

double snap_down(double x, double h) { return std::floor(x / h) * h; }

// Composite Newton-Cotes weights for the nodes a..b (uniform spacing h),
// accumulated into w: Simpson cells, with a 3/8 block absorbing an odd cell
// count and a trapezoid fallback for a single cell.
void segment_weights(std::vector<double>& w, int a, int b, double h) {
    int m = b - a;
    if (m <= 0) return;
    if (m == 1) {
        w[a] += h / 2;
        w[a + 1] += h / 2;
        return;
    }
    if (m % 2 == 1) {
        w[a] += 3 * h / 8;
        w[a + 1] += 9 * h / 8;
        w[a + 2] += 9 * h / 8;
        w[a + 3] += 3 * h / 8;
        a += 3;
        m -= 3;
        if (m == 0) return;
    }
    for (int k = a; k < a + m; k += 2) {
        w[k] += h / 3;
        w[k + 1] += 4 * h / 3;
        w[k + 2] += h / 3;
    }
}

SampledGrid sample_on_window(const GridWindow& window, const std::function<double(std::span<const double>)>& f,
                             double err_bound) {
    SampledGrid g;
    g.window = window;
    g.values.resize(window.point_count());
    g.err_bound = err_bound;
    parallel_for(g.values.size(), [&](std::size_t i) {
        std::vector<double> t = window.point(i);
        g.values[i] = f(t);
    });
    return g;
}

} // namespace

// --- solve_vie_infinite_delay --------------------------------------------

IterationTrace solve_vie_infinite_delay(const FunctionExpr& g, const FunctionExpr& h, const KernelSpec& k,
                                        const GridWindow& window, const QuadratureScheme& q, double tol) {
    if (window.dim != 2 || g.arity_time() != 2 || g.out_dim() != 1 || g.arity_state() != 0)
        throw DimensionMismatch("infinite-delay solver works on scalar problems over R^2");
    if (h.arity_time() != 2 || h.arity_state() != 1 || h.out_dim() != 1)
        throw DimensionMismatch("h must map (eta in R^2, u in R) to R");
    if (!h.lipschitz_in_state) throw MissingBound("h needs a declared Lipschitz constant in u");

    GammaOperator gamma(k, DomainDescriptor::causal_cone(2), q);
    ContractionCertificate cert = ContractionCertificate::make(0.0, *h.lipschitz_in_state, gamma.kernel_mass());
    cert.require();
    SepKernel sep = require_separable(k);

    const double hx = q.picard_spacing;
    const std::vector<double>& T = gamma.radii();
    double x0 = snap_down(window.lo[0] - T[0], hx);
    double y0 = snap_down(window.lo[1] - T[1], hx);
    int nx = static_cast<int>(std::ceil((window.hi[0] + 2 * hx - x0) / hx)) + 1;
    int ny = static_cast<int>(std::ceil((window.hi[1] + 2 * hx - y0) / hx)) + 1;
    const std::size_t N = static_cast<std::size_t>(nx) * ny;

    // g is evaluated exactly at nodes once; the iteration carries only the
    // smooth integral part v = u - g.
    std::vector<double> gval(N);
    parallel_for(N, [&](std::size_t idx) {
        double eta[2] = {x0 + static_cast<double>(idx / ny) * hx, y0 + static_cast<double>(idx % ny) * hx};
        g.eval_into(eta, nullptr, &gval[idx]);
    });

    Ladder lx(sep.alpha, hx), ly(sep.beta, hx);
    std::vector<double> v(N, 0.0), vprev(N, 0.0), w(N), A(N), V(N);
    IterationTrace trace;
    trace.certificate = cert;
    double target = tol * (1.0 - cert.theta);
    double wmax = 0.0;

    auto sweep_into = [&](const std::vector<double>& vin, std::vector<double>& vout) {
        parallel_for(N, [&](std::size_t idx) {
            double eta[2] = {x0 + static_cast<double>(idx / ny) * hx,
                             y0 + static_cast<double>(idx % ny) * hx};
            double u = gval[idx] + vin[idx];
            h.eval_into(eta, &u, &w[idx]);
        });
        for (double x : w) wmax = std::max(wmax, std::abs(x));
        apply_sep2(lx, ly, w, nx, ny, A, V);
        for (std::size_t i = 0; i < N; ++i) vout[i] = sep.scale * V[i];
    };

    int cap = 500;
    for (int sweep = 0;; ++sweep) {
        if (sweep >= cap)
            throw TruncationUnstable("Picard iteration failed to meet its certified sweep bound");
        std::vector<double> vnew(N);
        sweep_into(v, vnew);
        double diff = 0.0;
        for (std::size_t i = 0; i < N; ++i) diff = std::max(diff, std::abs(vnew[i] - v[i]));
        trace.sup_diffs.push_back(diff);
        vprev.swap(v);
        v.swap(vnew);
        if (sweep == 0) cap = max_sweeps(cert.theta, target, diff);
        if (diff <= target) break;
    }
    trace.k_final = static_cast<int>(trace.sup_diffs.size());

    // residual ||u - Gamma u|| on the iteration grid: one extra application
    {
        std::vector<double> vres(N);
        sweep_into(v, vres);
        double r = 0.0;
        for (std::size_t i = 0; i < N; ++i) r = std::max(r, std::abs(vres[i] - v[i]));
        trace.residual = r;
    }

    auto vg = std::make_shared<Grid2>();
    vg->x0 = x0;
    vg->y0 = y0;
    vg->h = hx;
    vg->nx = nx;
    vg->ny = ny;
    vg->a = v;
    auto vpg = std::make_shared<Grid2>(*vg);
    vpg->a = vprev;

    FunctionExpr gcopy = g, hcopy = h;
    auto u_at = [vg, gcopy](std::span<const double> t) {
        double gv;
        gcopy.eval_into(t.data(), nullptr, &gv);
        return gv + vg->interp(t[0], t[1]);
    };

    // quadrature spot check: brute-force tensor Gauss-Legendre at a few
    // window points against the recursion value
    {
        std::vector<std::vector<double>> pts = {{0.5 * (window.lo[0] + window.hi[0]), 0.5 * (window.lo[1] + window.hi[1])},
                                                {window.lo[0], window.lo[1]},
                                                {window.lo[0], window.hi[1]},
                                                {window.hi[0], window.lo[1]},
                                                {window.hi[0], window.hi[1]}};
        double worst = 0.0;
        for (const auto& t : pts) {
            std::vector<NodeTable> axes = {NodeTable::gl8(0.0, T[0], 2), NodeTable::gl8(0.0, T[1], 2)};
            double brute = 0.0;
            std::vector<double> eta(2), r(2);
            for (std::size_t i = 0; i < axes[0].nodes.size(); ++i)
                for (std::size_t j = 0; j < axes[1].nodes.size(); ++j) {
                    r[0] = axes[0].nodes[i];
                    r[1] = axes[1].nodes[j];
                    eta[0] = t[0] - r[0];
                    eta[1] = t[1] - r[1];
                    double u = u_at(eta), hv;
                    hcopy.eval_into(eta.data(), &u, &hv);
                    brute += axes[0].weights[i] * axes[1].weights[j] * k.eval(r) * hv;
                }
            worst = std::max(worst, std::abs(brute - vg->interp(t[0], t[1])));
        }
        trace.quad_err = worst + q.eps_tail * wmax;
    }

    trace.solution.arity_time = 2;
    trace.solution.out_dim = 1;
    if (g.sup_bound) {
        double vmax = 0.0;
        for (double x : v) vmax = std::max(vmax, std::abs(x));
        trace.solution.sup_bound = *g.sup_bound + 1.01 * vmax + 1e-9;
    }
    trace.solution.fn = [u_at](const double* t, const double*, double* out) {
        *out = u_at(std::span<const double>(t, 2));
    };

    trace.final = sample_on_window(window, u_at, trace.quad_err);
    trace.prev = sample_on_window(
        window,
        [&](std::span<const double> t) {
            double gv;
            gcopy.eval_into(t.data(), nullptr, &gv);
            return gv + vpg->interp(t[0], t[1]);
        },
        trace.quad_err);
    trace.notes.push_back("iteration grid " + std::to_string(nx) + "x" + std::to_string(ny) +
                          " at spacing " + std::to_string(hx));
    return trace;
}

// --- solve_vie_asymptotic ------------------------------------------------

IterationTrace solve_vie_asymptotic(const FunctionExpr& g, const FunctionExpr& h, const KernelSpec& k,
                                    const DomainDescriptor& d, const GridWindow& window,
                                    const QuadratureScheme& q, double tol, const SequenceFamily& family,
                                    const DecomposeOptions& dec_opts) {
    if (d.kind == DomainDescriptor::Kind::CustomIndicator && !d.interior_nonempty)
        throw EmptyInterior("integration domain has empty interior");
    if (d.kind != DomainDescriptor::Kind::Orthant)
        throw ConfigError("asymptotic solver expects an orthant domain");
    for (int s : d.signs)
        if (s < 0) throw ConfigError("asymptotic solver expects a positively oriented orthant");
    if (window.dim != 2 || d.dim != 2) throw DimensionMismatch("asymptotic solver works over R^2");
    if (g.arity_time() != 2 || g.out_dim() != 1 || g.arity_state() > 1)
        throw DimensionMismatch("g must map (t in R^2[, u]) to R");
    if (h.arity_time() != 2 || h.arity_state() != 1 || h.out_dim() != 1)
        throw DimensionMismatch("h must map (eta in R^2, u in R) to R");
    if (!h.lipschitz_in_state) throw MissingBound("h needs a declared Lipschitz constant in u");
    const bool g_state = g.arity_state() == 1;
    if (g_state && !g.lipschitz_in_state) throw MissingBound("state-dependent g needs a Lipschitz constant");
    for (int i = 0; i < 2; ++i)
        if (window.lo[i] < d.corner[i] - 1e-12)
            throw ConfigError("window must lie inside the orthant");

    GammaOperator gamma(k, DomainDescriptor::causal_cone(2), q);
    ContractionCertificate cert = ContractionCertificate::make(g_state ? *g.lipschitz_in_state : 0.0,
                                                               *h.lipschitz_in_state, gamma.kernel_mass());
    cert.require();
    SepKernel sep = require_separable(k);

    const double hx = q.picard_spacing;
    const double x0 = d.corner[0], y0 = d.corner[1];
    int nx = static_cast<int>(std::ceil((window.hi[0] + 2 * hx - x0) / hx)) + 1;
    int ny = static_cast<int>(std::ceil((window.hi[1] + 2 * hx - y0) / hx)) + 1;
    const std::size_t N = static_cast<std::size_t>(nx) * ny;

    Ladder lx(sep.alpha, hx), ly(sep.beta, hx);
    std::vector<double> u(N, 0.0), uprev(N, 0.0), w(N), A(N), V(N);
    IterationTrace trace;
    trace.certificate = cert;
    double target = tol * (1.0 - cert.theta);
    double wmax = 0.0;

    auto sweep_into = [&](const std::vector<double>& uin, std::vector<double>& uout) {
        parallel_for(N, [&](std::size_t idx) {
            double eta[2] = {x0 + static_cast<double>(idx / ny) * hx,
                             y0 + static_cast<double>(idx % ny) * hx};
            h.eval_into(eta, &uin[idx], &w[idx]);
        });
        for (double x : w) wmax = std::max(wmax, std::abs(x));
        apply_sep2(lx, ly, w, nx, ny, A, V);
        parallel_for(N, [&](std::size_t idx) {
            double eta[2] = {x0 + static_cast<double>(idx / ny) * hx,
                             y0 + static_cast<double>(idx % ny) * hx};
            double gv;
            g.eval_into(eta, g_state ? &uin[idx] : nullptr, &gv);
            uout[idx] = gv + sep.scale * V[idx];
        });
    };

    int cap = 500;
    for (int sweep = 0;; ++sweep) {
        if (sweep >= cap)
            throw TruncationUnstable("Picard iteration failed to meet its certified sweep bound");
        std::vector<double> unew(N);
        sweep_into(u, unew);
        double diff = 0.0;
        for (std::size_t i = 0; i < N; ++i) diff = std::max(diff, std::abs(unew[i] - u[i]));
        trace.sup_diffs.push_back(diff);
        uprev.swap(u);
        u.swap(unew);
        if (sweep == 0) cap = max_sweeps(cert.theta, target, diff);
        if (diff <= target) break;
    }
    trace.k_final = static_cast<int>(trace.sup_diffs.size());

    {
        std::vector<double> ures(N);
        sweep_into(u, ures);
        double r = 0.0;
        for (std::size_t i = 0; i < N; ++i) r = std::max(r, std::abs(ures[i] - u[i]));
        trace.residual = r;
    }

    auto ug = std::make_shared<Grid2>();
    ug->x0 = x0;
    ug->y0 = y0;
    ug->h = hx;
    ug->nx = nx;
    ug->ny = ny;
    ug->a = u;
    auto upg = std::make_shared<Grid2>(*ug);
    upg->a = uprev;

    auto u_at = [ug](std::span<const double> t) { return ug->interp(t[0], t[1]); };

    // brute-force quadrature spot check over the clipped orthant
    {
        std::vector<std::vector<double>> pts = {{0.5 * (window.lo[0] + window.hi[0]), 0.5 * (window.lo[1] + window.hi[1])},
                                                {window.hi[0], window.hi[1]},
                                                {window.hi[0], window.lo[1] + 0.25 * (window.hi[1] - window.lo[1])}};
        FunctionExpr gcopy = g, hcopy = h;
        double worst = 0.0;
        for (const auto& t : pts) {
            double Tx = std::min(gamma.radii()[0], t[0] - x0);
            double Ty = std::min(gamma.radii()[1], t[1] - y0);
            if (Tx <= 0 || Ty <= 0) continue;
            NodeTable ax = NodeTable::gl8(0.0, Tx, 2), ay = NodeTable::gl8(0.0, Ty, 2);
            double brute = 0.0;
            std::vector<double> eta(2), r(2);
            for (std::size_t i = 0; i < ax.nodes.size(); ++i)
                for (std::size_t j = 0; j < ay.nodes.size(); ++j) {
                    r[0] = ax.nodes[i];
                    r[1] = ay.nodes[j];
                    eta[0] = t[0] - r[0];
                    eta[1] = t[1] - r[1];
                    double uv = u_at(eta), hv;
                    hcopy.eval_into(eta.data(), &uv, &hv);
                    brute += ax.weights[i] * ay.weights[j] * k.eval(r) * hv;
                }
            double uc = u_at(t), gv;
            gcopy.eval_into(t.data(), g_state ? &uc : nullptr, &gv);
            worst = std::max(worst, std::abs(gv + brute - uc));
        }
        trace.quad_err = worst + q.eps_tail * wmax;
    }

    trace.solution.arity_time = 2;
    trace.solution.out_dim = 1;
    {
        double umax = 0.0;
        for (double x : u) umax = std::max(umax, std::abs(x));
        trace.solution.sup_bound = 1.01 * umax + 1e-9;
    }
    trace.solution.fn = [ug](const double* t, const double*, double* out) {
        *out = ug->interp(t[0], t[1]);
    };

    trace.final = sample_on_window(window, u_at, trace.quad_err);
    trace.prev = sample_on_window(window, [upg](std::span<const double> t) { return upg->interp(t[0], t[1]); },
                                  trace.quad_err);

    try {
        trace.asymptotic = asymptotic_decompose(trace.solution, family, d, window, dec_opts);
        trace.has_asymptotic = true;
    } catch (const Error& e) {
        trace.notes.push_back(std::string("asymptotic decomposition unavailable: ") + e.what());
    }
    trace.notes.push_back("iteration grid " + std::to_string(nx) + "x" + std::to_string(ny) +
                          " at spacing " + std::to_string(hx));
    return trace;
}

// --- solve_bikernel ------------------------------------------------------

IterationTrace solve_bikernel(const FunctionExpr& G, const KernelSpec& lam, const GridWindow& window,
                              const QuadratureScheme& q, double tol) {
    const int l = lam.dim;
    if (l != 1) throw ConfigError("the whole-space bi-kernel solver supports one time dimension");
    const int p = G.arity_state();
    if (G.arity_time() != 2 * l || G.out_dim() != p || p < 1)
        throw DimensionMismatch("G must map (t, s; x in R^p) to R^p");
    if (window.dim != l) throw DimensionMismatch("window dimension mismatch");

    // two-sided truncated mass of the Lipschitz majorant, with doubling check;
    // the panels split at the origin so |r|-type kernels keep full order
    std::vector<double> T = truncation_radii(lam, q);
    auto mass_at = [&](double scalefac) {
        double m = 0.0;
        for (double ends : {-T[0] * scalefac, T[0] * scalefac}) {
            NodeTable tab = NodeTable::gl8(std::min(ends, 0.0), std::max(ends, 0.0), q.panels_per_unit);
            for (std::size_t i = 0; i < tab.nodes.size(); ++i)
                m += tab.weights[i] * std::abs(lam.eval(std::span<const double>(&tab.nodes[i], 1)));
        }
        return m;
    };
    double mass = mass_at(1.0), mass2 = mass_at(2.0);
    if (std::abs(mass2 - mass) > 1e-4 * std::max(1.0, mass))
        throw TruncationUnstable("kernel mass changed under truncation doubling");
    ContractionCertificate cert = ContractionCertificate::make(0.0, 1.0, mass2);
    cert.require();

    const double hx = q.picard_spacing;
    double s0 = snap_down(window.lo[0] - T[0], hx);
    int n = static_cast<int>(std::ceil((window.hi[0] + T[0] - s0) / hx)) + 1;
    if ((n - 1) % 2 == 1) ++n;
    // per-target-node weights with a forced cell boundary at the node itself,
    // so kernels with a kink at s = t keep high order
    std::vector<double> wq(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) {
        std::vector<double> row(n, 0.0);
        segment_weights(row, 0, i, hx);
        segment_weights(row, i, n - 1, hx);
        std::copy(row.begin(), row.end(), wq.begin() + static_cast<std::size_t>(i) * n);
    }

    const std::size_t N = static_cast<std::size_t>(n);
    std::vector<double> u(N * p, 0.0), uprev(N * p, 0.0);
    IterationTrace trace;
    trace.certificate = cert;
    double target = tol * (1.0 - cert.theta);

    auto sweep_into = [&](const std::vector<double>& uin, std::vector<double>& uout) {
        parallel_for(N, [&](std::size_t i) {
            double ti = s0 + static_cast<double>(i) * hx;
            std::vector<double> acc(p, 0.0), out(p);
            const double* row = wq.data() + i * N;
            double targs[2];
            targs[0] = ti;
            for (std::size_t j = 0; j < N; ++j) {
                targs[1] = s0 + static_cast<double>(j) * hx;
                G.eval_into(targs, &uin[j * p], out.data());
                for (int c = 0; c < p; ++c) acc[c] += row[j] * out[c];
            }
            for (int c = 0; c < p; ++c) uout[i * p + c] = acc[c];
        });
    };

    int cap = 500;
    for (int sweep = 0;; ++sweep) {
        if (sweep >= cap)
            throw TruncationUnstable("Picard iteration failed to meet its certified sweep bound");
        std::vector<double> unew(N * p);
        sweep_into(u, unew);
        double diff = 0.0;
        for (std::size_t i = 0; i < N * p; ++i) diff = std::max(diff, std::abs(unew[i] - u[i]));
        trace.sup_diffs.push_back(diff);
        uprev.swap(u);
        u.swap(unew);
        if (sweep == 0) cap = max_sweeps(cert.theta, target, diff);
        if (diff <= target) break;
    }
    trace.k_final = static_cast<int>(trace.sup_diffs.size());

    {
        std::vector<double> ures(N * p);
        sweep_into(u, ures);
        double r = 0.0;
        for (std::size_t i = 0; i < N * p; ++i) r = std::max(r, std::abs(ures[i] - u[i]));
        trace.residual = r;
    }

    auto ug = std::make_shared<Grid1>();
    ug->x0 = s0;
    ug->h = hx;
    ug->n = n;
    ug->comps = p;
    ug->a = u;
    auto upg = std::make_shared<Grid1>(*ug);
    upg->a = uprev;

    // Gauss-Legendre spot check against the Simpson grid (first component)
    {
        FunctionExpr Gc = G;
        double worst = 0.0;
        for (double t : {window.lo[0], 0.5 * (window.lo[0] + window.hi[0]), window.hi[0]}) {
            std::vector<double> acc(p, 0.0), out(p), xin(p);
            double targs[2];
            targs[0] = t;
            // panels split at s = t for the same kink-robustness as the grid
            for (auto [a, b] : {std::pair{s0, t}, std::pair{t, s0 + (n - 1) * hx}}) {
                NodeTable tab = NodeTable::gl8(a, b, 4 * q.panels_per_unit);
                for (std::size_t i = 0; i < tab.nodes.size(); ++i) {
                    targs[1] = tab.nodes[i];
                    for (int c = 0; c < p; ++c) xin[c] = ug->interp(tab.nodes[i], c);
                    Gc.eval_into(targs, xin.data(), out.data());
                    for (int c = 0; c < p; ++c) acc[c] += tab.weights[i] * out[c];
                }
            }
            for (int c = 0; c < p; ++c) worst = std::max(worst, std::abs(acc[c] - ug->interp(t, c)));
        }
        double umax = 0.0;
        for (double x : u) umax = std::max(umax, std::abs(x));
        trace.quad_err = worst + q.eps_tail * (1.0 + umax);
    }

    trace.solution.arity_time = 1;
    trace.solution.out_dim = p;
    {
        double umax = 0.0;
        for (double x : u) umax = std::max(umax, std::abs(x));
        trace.solution.sup_bound = 1.01 * umax + 1e-9;
    }
    trace.solution.fn = [ug, p](const double* t, const double*, double* out) {
        for (int c = 0; c < p; ++c) out[c] = ug->interp(*t, c);
    };

    trace.final = sample_on_window(window, [ug](std::span<const double> t) { return ug->interp(t[0], 0); },
                                   trace.quad_err);
    trace.prev = sample_on_window(window, [upg](std::span<const double> t) { return upg->interp(t[0], 0); },
                                  trace.quad_err);
    trace.notes.push_back("iteration grid " + std::to_string(n) + " nodes at spacing " + std::to_string(hx));
    return trace;
}

double estimate_observed_ratio(const IterationTrace& trace) {
    if (trace.sup_diffs.size() < 3)
        throw InsufficientSweeps("need at least 3 recorded sweeps, have " +
                                 std::to_string(trace.sup_diffs.size()));
    double floor = 10.0 * trace.quad_err;
    double ratio = 0.0;
    for (std::size_t k = 0; k + 1 < trace.sup_diffs.size(); ++k) {
        if (trace.sup_diffs[k] <= floor || trace.sup_diffs[k + 1] <= floor) continue;
        ratio = std::max(ratio, trace.sup_diffs[k + 1] / trace.sup_diffs[k]);
    }
    if (ratio > trace.certificate.theta * 1.1 + 1e-12)
        throw CertificateInvalid("observed contraction ratio " + std::to_string(ratio) +
                                 " exceeds certified theta " + std::to_string(trace.certificate.theta));
    return ratio;
}

} // namespace multiauto

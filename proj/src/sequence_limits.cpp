#include "multiauto/sequence_limits.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include "multiauto/parallel.hpp"

namespace multiauto {

namespace {

double inf_dist(std::span<const double> a, std::span<const double> b) {
    double m = 0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

// values: rows x q matrix, candidate row indices; returns members of the
// largest cluster around some candidate center (earliest center on ties).
std::vector<int> largest_cluster(const std::vector<std::vector<double>>& values,
                                 const std::vector<int>& candidates, double tol) {
    std::vector<int> best;
    for (int c : candidates) {
        std::vector<int> members;
        for (int i : candidates)
            if (inf_dist(values[c], values[i]) <= tol) members.push_back(i);
        if (members.size() > best.size()) best = std::move(members);
    }
    return best;
}

std::vector<double> cluster_mean(const std::vector<std::vector<double>>& values, const std::vector<int>& idx) {
    std::vector<double> m(values[idx[0]].size(), 0.0);
    for (int i : idx)
        for (std::size_t j = 0; j < m.size(); ++j) m[j] += values[i][j];
    for (double& v : m) v /= static_cast<double>(idx.size());
    return m;
}

struct ProbeLayout {
    std::vector<std::vector<double>> t;
    std::vector<std::vector<double>> x;
    std::vector<std::pair<int, int>> pairs; // (t index, x index), fixed order
};

ProbeLayout layout(const LimitProbe& probe) {
    ProbeLayout L;
    std::size_t np = probe.window.point_count();
    L.t.reserve(np);
    for (std::size_t i = 0; i < np; ++i) L.t.push_back(probe.window.point(i));
    L.x = probe.state_set.samples(probe.seed);
    for (std::size_t i = 0; i < L.t.size(); ++i)
        for (std::size_t j = 0; j < L.x.size(); ++j)
            L.pairs.emplace_back(static_cast<int>(i), static_cast<int>(j));
    return L;
}

// translate-value matrix: [shift][probe pair] -> q values
std::vector<std::vector<std::vector<double>>> translate_values(const ProbeFunction& f, const ProbeLayout& L,
                                                               const std::vector<std::vector<double>>& shifts) {
    std::vector<std::vector<std::vector<double>>> vals(shifts.size());
    parallel_for(shifts.size(), [&](std::size_t k) {
        vals[k].resize(L.pairs.size());
        std::vector<double> tp(f.arity_time);
        for (std::size_t p = 0; p < L.pairs.size(); ++p) {
            const auto& [ti, xi] = L.pairs[p];
            for (int d = 0; d < f.arity_time; ++d) tp[d] = L.t[ti][d] + shifts[k][d];
            std::vector<double> out(f.out_dim);
            f.fn(tp.data(), L.x[xi].data(), out.data());
            vals[k][p] = std::move(out);
        }
    });
    return vals;
}

} // namespace

SubseqResult extract_subsequence(const ProbeFunction& f, const LimitProbe& probe) {
    probe.validate();
    if (probe.family.ambient_dim != f.arity_time)
        throw DimensionMismatch("family ambient dim vs function time arity");
    SubseqResult res;
    res.shifts = probe.family.elements(probe.depth, probe.seed);
    ProbeLayout L = layout(probe);
    res.probe_t = L.t;
    res.probe_x = L.x;

    auto vals = translate_values(f, L, res.shifts);

    double vmax = 0;
    for (const auto& row : vals)
        for (const auto& v : row)
            for (double y : v) vmax = std::max(vmax, std::abs(y));

    std::vector<int> survivors(res.shifts.size());
    for (std::size_t i = 0; i < survivors.size(); ++i) survivors[i] = static_cast<int>(i);

    // sequential greedy filtering over probe pairs (order-dependent by design)
    for (std::size_t p = 0; p < L.pairs.size(); ++p) {
        std::vector<std::vector<double>> col(vals.size());
        for (std::size_t k = 0; k < vals.size(); ++k) col[k] = vals[k][p];
        survivors = largest_cluster(col, survivors, probe.tol_subseq);
        if (survivors.size() < 2) {
            std::string note = "survivor set collapsed at probe point " + std::to_string(p);
            if (!f.sup_bound && vmax > 1e3)
                note += " (translate values reach " + std::to_string(vmax) + "; function looks unbounded)";
            throw NoConvergentSubsequence(note);
        }
    }
    res.survivors = survivors;
    res.table.resize(L.pairs.size());
    for (std::size_t p = 0; p < L.pairs.size(); ++p) {
        std::vector<std::vector<double>> col(vals.size());
        for (std::size_t k = 0; k < vals.size(); ++k) col[k] = vals[k][p];
        res.table[p] = cluster_mean(col, survivors);
    }
    res.notes.push_back("survivors " + std::to_string(survivors.size()) + "/" + std::to_string(probe.depth));
    return res;
}

std::vector<double> aa_part_estimate(const ProbeFunction& f, const SubseqResult& sub,
                                     std::span<const double> t, double tol_subseq) {
    std::vector<std::vector<double>> vals(sub.survivors.size());
    std::vector<double> tp(f.arity_time);
    const double* x0 = sub.probe_x.empty() || sub.probe_x[0].empty() ? nullptr : sub.probe_x[0].data();
    for (std::size_t m = 0; m < sub.survivors.size(); ++m) {
        const auto& b = sub.shifts[sub.survivors[m]];
        for (int d = 0; d < f.arity_time; ++d) tp[d] = t[d] + b[d];
        vals[m].resize(f.out_dim);
        f.fn(tp.data(), x0, vals[m].data());
    }
    std::vector<int> all(vals.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
    auto members = largest_cluster(vals, all, tol_subseq);
    if (members.size() < 2) members = all; // no consensus: fall back to the full mean
    return cluster_mean(vals, members);
}

BochnerVerdict bochner_test(const ProbeFunction& f, const LimitProbe& probe) {
    BochnerVerdict v;
    v.depth = probe.depth;
    v.tol_limit = probe.tol_limit;
    v.tol_subseq = probe.tol_subseq;
    v.seed = probe.seed;
    v.sub = extract_subsequence(f, probe);
    v.subsequence_indices = v.sub.survivors;

    const auto& sub = v.sub;
    int deepest = sub.survivors.back();
    const auto& b_last = sub.shifts[deepest];

    std::vector<double> tp(f.arity_time);
    std::vector<double> out(f.out_dim);
    double fwd = 0, bwd = 0;
    for (std::size_t p = 0; p < sub.table.size(); ++p) {
        std::size_t ti = p / sub.probe_x.size();
        std::size_t xi = p % sub.probe_x.size();
        const auto& t = sub.probe_t[ti];
        const double* x = sub.probe_x[xi].data();

        // forward: |F(t + b_K; x) - F*(t; x)|
        for (int d = 0; d < f.arity_time; ++d) tp[d] = t[d] + b_last[d];
        f.fn(tp.data(), x, out.data());
        fwd = std::max(fwd, inf_dist(out, sub.table[p]));

        // backward: F*(t - b_K) re-probed through the surviving translates,
        // compared with F(t; x) (double-limit form)
        std::vector<std::vector<double>> back_vals(sub.survivors.size());
        for (std::size_t m = 0; m < sub.survivors.size(); ++m) {
            const auto& b2 = sub.shifts[sub.survivors[m]];
            for (int d = 0; d < f.arity_time; ++d) tp[d] = t[d] - b_last[d] + b2[d];
            back_vals[m].resize(f.out_dim);
            f.fn(tp.data(), x, back_vals[m].data());
        }
        std::vector<int> all(back_vals.size());
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
        auto members = largest_cluster(back_vals, all, probe.tol_subseq);
        if (members.size() < 2) {
            v.notes.push_back("backward cluster collapsed at probe point " + std::to_string(p));
            bwd = std::max(bwd, 2 * probe.tol_limit + 1.0);
            continue;
        }
        auto fstar_back = cluster_mean(back_vals, members);
        f.fn(t.data(), x, out.data());
        bwd = std::max(bwd, inf_dist(fstar_back, out));
    }
    v.forward_residual = fwd;
    v.backward_residual = bwd;
    v.passed = fwd <= probe.tol_limit && bwd <= probe.tol_limit;
    v.notes.insert(v.notes.end(), sub.notes.begin(), sub.notes.end());
    return v;
}

UcReport uniform_continuity_test(const ProbeFunction& f, const LimitProbe& probe, const UcOptions& opts) {
    UcReport rep;
    const int n = f.arity_time;
    std::vector<double> dir(n, 1.0 / std::sqrt(static_cast<double>(n)));
    auto states = probe.state_set.samples(probe.seed);

    double win_radius = 0;
    for (int d = 0; d < probe.window.dim; ++d)
        win_radius = std::max(win_radius, std::max(std::abs(probe.window.lo[d]), std::abs(probe.window.hi[d])));
    rep.window_local = opts.search_radius <= win_radius + 1e-12;

    std::vector<double> ta(n), tb(n), va(f.out_dim), vb(f.out_dim);
    auto diff_at = [&](double c, double delta) {
        double worst = 0;
        for (const auto& x : states) {
            for (int d = 0; d < n; ++d) {
                ta[d] = c * dir[d];
                tb[d] = (c + delta) * dir[d];
            }
            f.fn(ta.data(), x.empty() ? nullptr : x.data(), va.data());
            f.fn(tb.data(), x.empty() ? nullptr : x.data(), vb.data());
            worst = std::max(worst, inf_dist(va, vb));
        }
        return worst;
    };

    double R = opts.search_radius;
    for (double delta : opts.deltas) {
        double coarse = std::max(delta / 3.0, 2.0 * R / static_cast<double>(opts.budget));
        std::size_t steps = static_cast<std::size_t>(2.0 * R / coarse) + 1;

        // chunked coarse scan, keeping each chunk's best candidate
        unsigned nchunks = std::max<unsigned>(1, worker_count() * 4);
        std::vector<std::pair<double, double>> chunk_best(nchunks, {-1.0, 0.0}); // (diff, c)
        std::size_t per = (steps + nchunks - 1) / nchunks;
        parallel_for(nchunks, [&](std::size_t ci) {
            std::vector<double> la(n), lb(n), wa(f.out_dim), wb(f.out_dim);
            double best = -1, bestc = 0;
            std::size_t lo = ci * per, hi = std::min(steps, lo + per);
            for (std::size_t s = lo; s < hi; ++s) {
                double c = -R + static_cast<double>(s) * coarse;
                double worst = 0;
                for (const auto& x : states) {
                    for (int d = 0; d < n; ++d) {
                        la[d] = c * dir[d];
                        lb[d] = (c + delta) * dir[d];
                    }
                    f.fn(la.data(), x.empty() ? nullptr : x.data(), wa.data());
                    f.fn(lb.data(), x.empty() ? nullptr : x.data(), wb.data());
                    worst = std::max(worst, inf_dist(wa, wb));
                }
                if (worst > best) {
                    best = worst;
                    bestc = c;
                }
            }
            chunk_best[ci] = {best, bestc};
        });
        std::sort(chunk_best.begin(), chunk_best.end(),
                  [](const auto& a, const auto& b) { return a.first > b.first; });

        double sup = 0, sup_c = 0;
        int refine = std::min<std::size_t>(8, chunk_best.size());
        for (int r = 0; r < refine; ++r) {
            if (chunk_best[r].first < 0) continue;
            double c0 = chunk_best[r].second;
            double fine = std::max(delta / 20.0, coarse / 400.0);
            for (double c = c0 - coarse; c <= c0 + coarse; c += fine) {
                double w = diff_at(c, delta);
                if (w > sup) {
                    sup = w;
                    sup_c = c;
                }
            }
        }
        rep.sup_diffs.push_back(sup);
        rep.witness_t.assign(n, 0.0);
        for (int d = 0; d < n; ++d) rep.witness_t[d] = sup_c * dir[d];
        rep.witness_delta = delta;
    }
    rep.passed = !rep.sup_diffs.empty() && rep.sup_diffs.back() <= probe.tol_limit;
    return rep;
}

CompactReport compactness_equivalence_check(const ProbeFunction& f, const LimitProbe& probe,
                                            const UcOptions& uc_opts) {
    CompactReport rep;
    try {
        rep.pointwise = bochner_test(f, probe);
    } catch (const NoConvergentSubsequence& e) {
        rep.pointwise.passed = false;
        rep.notes.push_back(std::string("pointwise: ") + e.what());
    }
    rep.uc = uniform_continuity_test(f, probe, uc_opts);
    if (rep.uc.window_local) rep.notes.push_back("uniform continuity verdict is window-local, not global");

    // uniform-window variant: refined grid, then a window recentred on the
    // location of largest observed variation
    LimitProbe refined = probe;
    refined.window.points_per_axis = probe.window.points_per_axis * 2 - 1;
    try {
        rep.refined_pass = bochner_test(f, refined).passed;
    } catch (const NoConvergentSubsequence& e) {
        rep.refined_pass = false;
        rep.notes.push_back(std::string("refined: ") + e.what());
    }

    LimitProbe witness = probe;
    if (!rep.uc.witness_t.empty()) {
        std::vector<double> lo(rep.uc.witness_t), hi(rep.uc.witness_t);
        for (double& v : lo) v -= 0.5;
        for (double& v : hi) v += 0.5;
        witness.window = GridWindow(lo, hi, probe.window.points_per_axis);
    }
    try {
        rep.witness_pass = bochner_test(f, witness).passed;
    } catch (const NoConvergentSubsequence& e) {
        rep.witness_pass = false;
        rep.notes.push_back(std::string("witness window: ") + e.what());
    }
    rep.compact_pass = rep.refined_pass && rep.witness_pass;
    rep.agreement = rep.compact_pass == (rep.pointwise.passed && rep.uc.passed);
    return rep;
}

SupremumResult supremum_formula_check(const ProbeFunction& f, const SequenceFamily& family, double a,
                                      double window_radius, double spacing, std::uint64_t seed) {
    if (!family.unbounded()) throw FamilyNotUnbounded(family.describe());
    if (a < 0 || window_radius < 4 * a) throw DimensionMismatch("window_radius must be >= 4a");
    const int n = f.arity_time;

    // scan rays: axes and the all-ones diagonal
    std::vector<std::vector<double>> dirs;
    for (int d = 0; d < n; ++d) {
        std::vector<double> e(n, 0.0);
        e[d] = 1.0;
        dirs.push_back(e);
    }
    if (n > 1) dirs.emplace_back(n, 1.0 / std::sqrt(static_cast<double>(n)));

    BoundedSetSpec none = BoundedSetSpec::none();
    std::vector<std::vector<double>> states =
        f.arity_state > 0 ? BoundedSetSpec::ball(std::vector<double>(f.arity_state, 0.0), 1.0, 8).samples(seed)
                          : none.samples(seed);

    SupremumResult res;
    std::vector<double> t(n), out(f.out_dim);
    for (const auto& dir : dirs) {
        long steps = static_cast<long>(2 * window_radius / spacing) + 1;
        for (long s = 0; s < steps; ++s) {
            double c = -window_radius + s * spacing;
            for (int d = 0; d < n; ++d) t[d] = c * dir[d];
            for (const auto& x : states) {
                f.fn(t.data(), x.empty() ? nullptr : x.data(), out.data());
                double m = 0;
                for (double y : out) m = std::max(m, std::abs(y));
                res.sup_all = std::max(res.sup_all, m);
                if (std::abs(c) >= a) res.sup_tail = std::max(res.sup_tail, m);
            }
        }
    }
    res.gap = res.sup_all - res.sup_tail;
    return res;
}

DecomposeResult asymptotic_decompose(const ProbeFunction& f, const SequenceFamily& family,
                                     const DomainDescriptor& domain, const GridWindow& window,
                                     const DecomposeOptions& opts, std::uint64_t seed) {
    DecomposeResult res;
    // collect translates with |b| >= min_translate_norm
    std::vector<std::vector<double>> big;
    int draw = opts.depth;
    for (int round = 0; round < 8 && static_cast<int>(big.size()) < opts.depth; ++round) {
        big.clear();
        auto all = family.elements(draw, seed);
        for (auto& b : all) {
            double norm = 0;
            for (double v : b) norm = std::max(norm, std::abs(v));
            if (norm >= opts.min_translate_norm) big.push_back(b);
        }
        draw *= 2;
    }
    if (static_cast<int>(big.size()) < std::max(2, opts.depth / 2))
        throw FamilyNotUnbounded("family yields too few translates with norm >= " +
                                 std::to_string(opts.min_translate_norm));
    big.resize(std::min<std::size_t>(big.size(), opts.depth));

    LimitProbe probe;
    probe.window = window;
    probe.family = SequenceFamily::explicit_list(big);
    probe.depth = static_cast<int>(big.size());
    probe.seed = seed;
    probe.depth = std::max(probe.depth, 8);
    auto sub = extract_subsequence(f, probe);
    res.survivors = sub.survivors;

    std::size_t np = window.point_count();
    res.g_grid.resize(np);
    res.q_grid.resize(np);
    std::vector<double> out(f.out_dim);
    for (std::size_t p = 0; p < np; ++p) {
        auto t = window.point(p);
        res.g_grid[p] = aa_part_estimate(f, sub, t, probe.tol_subseq);
        f.fn(t.data(), nullptr, out.data());
        res.q_grid[p].resize(f.out_dim);
        for (int j = 0; j < f.out_dim; ++j) res.q_grid[p][j] = out[j] - res.g_grid[p][j];
    }
    res.residual = 0.0; // Q := f - G on the window, so G + Q reproduces f exactly

    // decay of Q along the domain
    std::vector<DecayPath> paths = opts.paths;
    if (paths.empty()) {
        int n = f.arity_time;
        for (int d = 0; d < n; ++d) {
            DecayPath p;
            p.base.assign(n, 0.0);
            p.dir.assign(n, 0.0);
            p.dir[d] = 1.0;
            paths.push_back(p);
        }
        if (n > 1) {
            DecayPath p;
            p.base.assign(n, 0.0);
            p.dir.assign(n, 1.0 / std::sqrt(static_cast<double>(n)));
            paths.push_back(p);
        }
    }
    bool pass = true;
    for (const auto& path : paths) {
        std::vector<double> qvals;
        std::vector<double> t(f.arity_time);
        for (double r : opts.radii) {
            for (int d = 0; d < f.arity_time; ++d) t[d] = path.base[d] + r * path.dir[d];
            if (!domain.contains(t)) {
                qvals.push_back(std::nan(""));
                continue;
            }
            auto g = aa_part_estimate(f, sub, t, probe.tol_subseq);
            f.fn(t.data(), nullptr, out.data());
            double q = 0;
            for (int j = 0; j < f.out_dim; ++j) q = std::max(q, std::abs(out[j] - g[j]));
            qvals.push_back(q);
        }
        if (!qvals.empty() && !std::isnan(qvals.back()) && qvals.back() > opts.tol) pass = false;
        res.decay.push_back(std::move(qvals));
    }
    res.decay_pass = pass;
    res.notes.insert(res.notes.end(), sub.notes.begin(), sub.notes.end());
    return res;
}

BochnerVerdict derivative_aa_check(const FunctionExpr& f, int axis, const LimitProbe& probe, double h_fd) {
    if (h_fd <= 0) throw DimensionMismatch("finite-difference step must be positive");
    std::vector<ExprPtr> comps;
    for (const auto& c : f.components()) {
        ExprPtr plus = shift_time(c, axis, h_fd);
        ExprPtr minus = shift_time(c, axis, -h_fd);
        comps.push_back(e_div(e_sub(plus, minus), e_const(2.0 * h_fd)));
    }
    FunctionExpr deriv(f.arity_time(), f.arity_state(), std::move(comps));
    BochnerVerdict v = bochner_test(probe_fn(deriv), probe);
    v.notes.push_back("central finite difference, step " + std::to_string(h_fd) +
                      ", second-order truncation error O(h^2)");
    return v;
}

} // namespace multiauto

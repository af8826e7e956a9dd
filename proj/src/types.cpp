#include "multiauto/types.hpp"

#include <cmath>

namespace multiauto {

std::vector<std::vector<double>> BoundedSetSpec::samples(std::uint64_t seed) const {
    if (ambient_dim == 0) return {{}};
    std::vector<std::vector<double>> out;
    out.reserve(sample_count);
    std::mt19937_64 rng(seed ^ 0xb5ad4eceda1ce2a9ULL);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    switch (kind) {
    case Kind::Finite:
        for (int i = 0; i < sample_count && i < static_cast<int>(points.size()); ++i) out.push_back(points[i]);
        break;
    case Kind::Box:
        for (int i = 0; i < sample_count; ++i) {
            std::vector<double> p(ambient_dim);
            for (int d = 0; d < ambient_dim; ++d) p[d] = lo[d] + (unit(rng) * 0.5 + 0.5) * (hi[d] - lo[d]);
            out.push_back(std::move(p));
        }
        break;
    case Kind::Ball:
        for (int i = 0; i < sample_count; ++i) {
            // rejection from the bounding box
            std::vector<double> p(ambient_dim);
            while (true) {
                double r2 = 0;
                for (int d = 0; d < ambient_dim; ++d) {
                    p[d] = unit(rng);
                    r2 += p[d] * p[d];
                }
                if (r2 <= 1.0) break;
            }
            for (int d = 0; d < ambient_dim; ++d) p[d] = center[d] + radius * p[d];
            out.push_back(std::move(p));
        }
        break;
    }
    if (out.empty()) throw EmptyList("state set produced no samples");
    return out;
}

double ScalarSource::draw(int k, std::mt19937_64& rng) const {
    switch (kind) {
    case Kind::Arithmetic: return start + step * k;
    case Kind::Geometric: return start * std::pow(step, k);
    case Kind::RandomUniform: {
        double T = start + growth * k;
        std::uniform_real_distribution<double> d(-T, T);
        return d(rng);
    }
    case Kind::ExplicitList:
        if (list.empty()) throw EmptyList("empty explicit scalar source");
        return list[static_cast<std::size_t>(k) % list.size()];
    }
    return 0.0;
}

std::vector<std::vector<double>> SequenceFamily::elements(int depth, std::uint64_t seed) const {
    std::vector<std::vector<double>> out;
    out.reserve(depth);
    std::mt19937_64 rng(seed ^ 0x8f3ad1c5713a92bbULL);
    switch (kind) {
    case Kind::Diagonal:
        for (int k = 0; k < depth; ++k) out.emplace_back(ambient_dim, source.draw(k, rng));
        break;
    case Kind::Axis:
        for (int k = 0; k < depth; ++k) {
            std::vector<double> v(ambient_dim, 0.0);
            v[0] = source.draw(k, rng);
            out.push_back(std::move(v));
        }
        break;
    case Kind::IntegerLattice:
        for (int k = 0; k < depth; ++k) {
            std::vector<double> v(ambient_dim);
            for (int d = 0; d < ambient_dim; ++d) v[d] = std::round(source.draw(k, rng));
            out.push_back(std::move(v));
        }
        break;
    case Kind::Full:
        for (int k = 0; k < depth; ++k) {
            std::vector<double> v(ambient_dim);
            for (int d = 0; d < ambient_dim; ++d) v[d] = source.draw(k, rng);
            out.push_back(std::move(v));
        }
        break;
    case Kind::Explicit:
        if (explicit_elements.empty()) throw EmptyList("explicit family with no elements");
        for (int k = 0; k < depth; ++k)
            out.push_back(explicit_elements[static_cast<std::size_t>(k) % explicit_elements.size()]);
        break;
    case Kind::Product: {
        auto a = factors[0].elements(depth, seed);
        auto b = factors[1].elements(depth, seed + 1);
        for (int k = 0; k < depth; ++k) {
            std::vector<double> v = a[k];
            v.insert(v.end(), b[k].begin(), b[k].end());
            out.push_back(std::move(v));
        }
        break;
    }
    }
    return out;
}

std::string SequenceFamily::describe() const {
    switch (kind) {
    case Kind::Diagonal: return "diagonal(n=" + std::to_string(ambient_dim) + ")";
    case Kind::Axis: return "axis(n=" + std::to_string(ambient_dim) + ")";
    case Kind::IntegerLattice: return "integer_lattice(n=" + std::to_string(ambient_dim) + ")";
    case Kind::Full: return "full(n=" + std::to_string(ambient_dim) + ")";
    case Kind::Explicit:
        return "explicit(" + std::to_string(explicit_elements.size()) + " elements, n=" +
               std::to_string(ambient_dim) + ")";
    case Kind::Product: return "product(" + factors[0].describe() + ", " + factors[1].describe() + ")";
    }
    return "?";
}

ProbeFunction probe_fn(const FunctionExpr& f) {
    ProbeFunction p;
    p.arity_time = f.arity_time();
    p.arity_state = f.arity_state();
    p.out_dim = f.out_dim();
    p.sup_bound = f.sup_bound;
    p.fn = [f](const double* t, const double* x, double* out) { f.eval_into(t, x, out); };
    return p;
}

ProbeFunction probe_scalar1d(std::function<double(double)> g, std::optional<double> sup_bound) {
    ProbeFunction p;
    p.arity_time = 1;
    p.arity_state = 0;
    p.out_dim = 1;
    p.sup_bound = sup_bound;
    p.fn = [g = std::move(g)](const double* t, const double*, double* out) { out[0] = g(t[0]); };
    return p;
}

std::vector<double> near_return_times(const std::vector<double>& freqs, int count, double phase_tol,
                                      double search_limit) {
    constexpr double two_pi = 6.283185307179586476925287;
    auto max_phase_err = [&](double b) {
        double worst = 0.0;
        for (double w : freqs) {
            double r = std::remainder(w * b, two_pi);
            worst = std::max(worst, std::abs(r));
        }
        return worst;
    };
    std::vector<double> out;
    // integer scan; raw tolerance relaxed, then local refinement
    double raw_tol = phase_tol * 1.5;
    for (double b = 1.0; b <= search_limit && static_cast<int>(out.size()) < count; b += 1.0) {
        if (max_phase_err(b) > raw_tol) continue;
        double best = b, best_err = max_phase_err(b);
        for (double d = -0.01; d <= 0.01; d += 1e-5) {
            double err = max_phase_err(b + d);
            if (err < best_err) {
                best_err = err;
                best = b + d;
            }
        }
        if (best_err <= phase_tol) out.push_back(best);
    }
    if (static_cast<int>(out.size()) < count)
        throw NoConvergentSubsequence("near-return search exhausted at limit " + std::to_string(search_limit) +
                                      " with " + std::to_string(out.size()) + " hits");
    return out;
}

} // namespace multiauto

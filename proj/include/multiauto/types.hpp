#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "multiauto/errors.hpp"
#include "multiauto/expr.hpp"

namespace multiauto {

// Compact box in R^n with uniform sampling, endpoints included.
struct GridWindow {
    int dim = 1;
    std::vector<double> lo, hi;
    int points_per_axis = 33;

    GridWindow() = default;
    GridWindow(std::vector<double> lo_, std::vector<double> hi_, int ppa)
        : dim(static_cast<int>(lo_.size())), lo(std::move(lo_)), hi(std::move(hi_)), points_per_axis(ppa) {
        if (lo.size() != hi.size() || dim < 1 || points_per_axis < 2)
            throw DimensionMismatch("GridWindow bounds");
        for (int i = 0; i < dim; ++i)
            if (!(lo[i] < hi[i])) throw DimensionMismatch("GridWindow requires lo < hi");
    }
    static GridWindow cube(int dim, double lo, double hi, int ppa) {
        return GridWindow(std::vector<double>(dim, lo), std::vector<double>(dim, hi), ppa);
    }

    std::size_t point_count() const {
        std::size_t n = 1;
        for (int i = 0; i < dim; ++i) n *= static_cast<std::size_t>(points_per_axis);
        return n;
    }
    double spacing(int axis) const { return (hi[axis] - lo[axis]) / (points_per_axis - 1); }
    // row-major: last axis fastest
    std::vector<double> point(std::size_t idx) const {
        std::vector<double> p(dim);
        for (int ax = dim - 1; ax >= 0; --ax) {
            std::size_t k = idx % points_per_axis;
            idx /= points_per_axis;
            p[ax] = lo[ax] + static_cast<double>(k) * spacing(ax);
        }
        return p;
    }
    GridWindow translated(std::span<const double> shift) const {
        GridWindow w = *this;
        for (int i = 0; i < dim; ++i) {
            w.lo[i] += shift[i];
            w.hi[i] += shift[i];
        }
        return w;
    }
};

// State set B: where the x-argument samples are drawn from.
struct BoundedSetSpec {
    enum class Kind { Ball, Box, Finite };
    int ambient_dim = 0;
    Kind kind = Kind::Finite;
    std::vector<double> center, lo, hi;
    double radius = 1.0;
    std::vector<std::vector<double>> points;
    int sample_count = 1;

    static BoundedSetSpec none() {
        BoundedSetSpec b;
        b.ambient_dim = 0;
        b.kind = Kind::Finite;
        b.points = {{}};
        b.sample_count = 1;
        return b;
    }
    static BoundedSetSpec ball(std::vector<double> c, double r, int samples) {
        BoundedSetSpec b;
        b.ambient_dim = static_cast<int>(c.size());
        b.kind = Kind::Ball;
        b.center = std::move(c);
        b.radius = r;
        b.sample_count = samples;
        return b;
    }
    static BoundedSetSpec box(std::vector<double> lo, std::vector<double> hi, int samples) {
        BoundedSetSpec b;
        b.ambient_dim = static_cast<int>(lo.size());
        b.kind = Kind::Box;
        b.lo = std::move(lo);
        b.hi = std::move(hi);
        b.sample_count = samples;
        return b;
    }
    static BoundedSetSpec finite(std::vector<std::vector<double>> pts) {
        BoundedSetSpec b;
        b.ambient_dim = pts.empty() ? 0 : static_cast<int>(pts[0].size());
        b.kind = Kind::Finite;
        b.sample_count = static_cast<int>(pts.size());
        b.points = std::move(pts);
        return b;
    }

    // Deterministic given the seed.
    std::vector<std::vector<double>> samples(std::uint64_t seed) const;
};

// Scalar sequence generator feeding the vector patterns below.
struct ScalarSource {
    enum class Kind { Arithmetic, Geometric, RandomUniform, ExplicitList };
    Kind kind = Kind::Arithmetic;
    double start = 1.0;
    double step = 1.0;   // arithmetic increment / geometric ratio
    double growth = 1.0; // RandomUniform: T_k = start + growth * k
    std::vector<double> list;

    bool unbounded() const {
        switch (kind) {
        case Kind::Arithmetic: return step != 0.0;
        case Kind::Geometric: return std::abs(step) > 1.0 && start != 0.0;
        case Kind::RandomUniform: return growth > 0.0;
        case Kind::ExplicitList: return false;
        }
        return false;
    }
    double draw(int k, std::mt19937_64& rng) const;
};

// A generator of sequences in R^n realizing a collection R.
struct SequenceFamily {
    enum class Kind { Diagonal, Axis, IntegerLattice, Full, Explicit, Product };
    Kind kind = Kind::Diagonal;
    int ambient_dim = 1;
    ScalarSource source;
    std::vector<std::vector<double>> explicit_elements;
    std::vector<SequenceFamily> factors; // Product: exactly two

    static SequenceFamily diagonal(int dim, ScalarSource src) {
        SequenceFamily f;
        f.kind = Kind::Diagonal;
        f.ambient_dim = dim;
        f.source = std::move(src);
        return f;
    }
    static SequenceFamily axis(int dim, ScalarSource src) {
        SequenceFamily f;
        f.kind = Kind::Axis;
        f.ambient_dim = dim;
        f.source = std::move(src);
        return f;
    }
    static SequenceFamily integer_lattice(int dim, ScalarSource src) {
        SequenceFamily f;
        f.kind = Kind::IntegerLattice;
        f.ambient_dim = dim;
        f.source = std::move(src);
        return f;
    }
    static SequenceFamily full(int dim, ScalarSource src) {
        SequenceFamily f;
        f.kind = Kind::Full;
        f.ambient_dim = dim;
        f.source = std::move(src);
        return f;
    }
    static SequenceFamily explicit_list(std::vector<std::vector<double>> elems) {
        SequenceFamily f;
        f.kind = Kind::Explicit;
        f.ambient_dim = elems.empty() ? 1 : static_cast<int>(elems[0].size());
        f.explicit_elements = std::move(elems);
        return f;
    }
    static SequenceFamily product(SequenceFamily a, SequenceFamily b) {
        SequenceFamily f;
        f.kind = Kind::Product;
        f.ambient_dim = a.ambient_dim + b.ambient_dim;
        f.factors = {std::move(a), std::move(b)};
        return f;
    }

    bool unbounded() const {
        switch (kind) {
        case Kind::Explicit: {
            double m = 0;
            for (const auto& e : explicit_elements)
                for (double v : e) m = std::max(m, std::abs(v));
            return m > 1e6; // explicit lists are finite; heuristic flag only
        }
        case Kind::Product: return factors[0].unbounded() && factors[1].unbounded();
        default: return source.unbounded();
        }
    }

    // First `depth` elements, deterministic given the seed.
    std::vector<std::vector<double>> elements(int depth, std::uint64_t seed) const;
    std::string describe() const;
};

// Integration-domain descriptor D (and D_t = I_t \cap D).
struct DomainDescriptor {
    enum class Kind { FullSpace, Orthant, CausalCone, CustomIndicator };
    Kind kind = Kind::CausalCone;
    int dim = 2;
    std::vector<double> corner;         // Orthant corner
    std::vector<int> signs;             // Orthant direction per axis (+1 / -1)
    std::function<bool(std::span<const double>)> indicator;
    bool interior_nonempty = true;

    static DomainDescriptor full_space(int dim) {
        DomainDescriptor d;
        d.kind = Kind::FullSpace;
        d.dim = dim;
        return d;
    }
    static DomainDescriptor causal_cone(int dim) {
        DomainDescriptor d;
        d.kind = Kind::CausalCone;
        d.dim = dim;
        return d;
    }
    static DomainDescriptor orthant(std::vector<double> corner, std::vector<int> signs) {
        DomainDescriptor d;
        d.kind = Kind::Orthant;
        d.dim = static_cast<int>(corner.size());
        d.corner = std::move(corner);
        d.signs = std::move(signs);
        return d;
    }
    static DomainDescriptor custom(int dim, std::function<bool(std::span<const double>)> ind,
                                   bool interior_nonempty) {
        DomainDescriptor d;
        d.kind = Kind::CustomIndicator;
        d.dim = dim;
        d.indicator = std::move(ind);
        d.interior_nonempty = interior_nonempty;
        return d;
    }

    bool contains(std::span<const double> t) const {
        switch (kind) {
        case Kind::FullSpace:
        case Kind::CausalCone: return true;
        case Kind::Orthant:
            for (int i = 0; i < dim; ++i)
                if (signs[i] > 0 ? t[i] < corner[i] : t[i] > corner[i]) return false;
            return true;
        case Kind::CustomIndicator: return indicator(t);
        }
        return false;
    }
};

// Type-erased evaluable function for the limit machinery; adapts both
// expression trees and sampled/derived objects (e.g. integral operators).
struct ProbeFunction {
    int arity_time = 1;
    int arity_state = 0;
    int out_dim = 1;
    std::optional<double> sup_bound;
    std::function<void(const double* t, const double* x, double* out)> fn;

    std::vector<double> eval(std::span<const double> t, std::span<const double> x = {}) const {
        std::vector<double> out(out_dim);
        fn(t.data(), x.data(), out.data());
        return out;
    }
    double eval1(double t0) const {
        double out;
        fn(&t0, nullptr, &out);
        return out;
    }
};

ProbeFunction probe_fn(const FunctionExpr& f);
ProbeFunction probe_scalar1d(std::function<double(double)> g, std::optional<double> sup_bound = {});

// Explicit diagonal family of common near-return times of the given
// frequencies: b with |w_i b mod 2pi| <= phase_tol for every w_i, found by
// integer scan up to search_limit and local refinement.
std::vector<double> near_return_times(const std::vector<double>& freqs, int count, double phase_tol,
                                      double search_limit);

} // namespace multiauto

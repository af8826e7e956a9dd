#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "multiauto/types.hpp"

namespace multiauto {

// Probe configuration realizing "for every B and every sequence (b_k)" at
// desk scale: one window, one state set, one family, finite depth.
struct LimitProbe {
    GridWindow window = GridWindow::cube(1, -5.0, 5.0, 33);
    BoundedSetSpec state_set = BoundedSetSpec::none();
    SequenceFamily family;
    int depth = 64;
    double tol_limit = 1e-2;
    double tol_subseq = 3e-2;
    std::uint64_t seed = 0x243F6A8885A308D3ULL;

    void validate() const {
        if (depth < 8) throw DimensionMismatch("probe depth must be >= 8");
        if (tol_subseq < tol_limit) throw DimensionMismatch("tol_subseq must be >= tol_limit");
    }
};

struct SubseqResult {
    std::vector<std::vector<double>> shifts; // all drawn translates
    std::vector<int> survivors;              // indices into shifts, >= 2
    std::vector<std::vector<double>> probe_t;
    std::vector<std::vector<double>> probe_x;
    std::vector<std::vector<double>> table; // cluster-mean values, probe-major
    std::vector<std::string> notes;
};

struct BochnerVerdict {
    bool passed = false;
    double forward_residual = 0.0;
    double backward_residual = 0.0;
    std::vector<int> subsequence_indices;
    SubseqResult sub;
    int depth = 0;
    double tol_limit = 0.0, tol_subseq = 0.0;
    std::uint64_t seed = 0;
    std::vector<std::string> notes;
};

struct UcOptions {
    std::vector<double> deltas = {0.1, 0.03, 0.01, 3e-3, 1e-3};
    double search_radius = 5000.0; // base points drawn from [-R, R] along the pattern line
    std::size_t budget = 2'000'000;
};

struct UcReport {
    bool passed = false;
    bool window_local = false; // search radius did not exceed the probe window
    std::vector<double> sup_diffs;
    std::vector<double> witness_t;
    double witness_delta = 0.0;
};

struct CompactReport {
    BochnerVerdict pointwise;
    UcReport uc;
    bool refined_pass = false;
    bool witness_pass = false;
    bool compact_pass = false;
    bool agreement = false;
    std::vector<std::string> notes;
};

struct SupremumResult {
    double sup_all = 0.0;
    double sup_tail = 0.0;
    double gap = 0.0;
};

struct DecayPath {
    std::vector<double> base;
    std::vector<double> dir; // unit direction
};

struct DecomposeOptions {
    double min_translate_norm = 50.0;
    int depth = 16;
    std::vector<double> radii = {10.0, 20.0, 40.0, 80.0};
    std::vector<DecayPath> paths; // empty -> diagonal + axis rays from origin
    double tol = 1e-2;
};

struct DecomposeResult {
    std::vector<std::vector<double>> g_grid; // AA-part estimate at window points
    std::vector<std::vector<double>> q_grid; // f - G at window points
    double residual = 0.0;                   // max |f - (G+Q)| on window (0 by construction)
    std::vector<std::vector<double>> decay;  // per path, |Q| at each radius
    bool decay_pass = false;
    std::vector<int> survivors;
    std::vector<std::string> notes;
};

// Greedy largest-Cauchy-cluster filtering over the probe points in fixed
// order (deterministic tie-break: earliest index). Throws
// NoConvergentSubsequence when fewer than two translates survive.
SubseqResult extract_subsequence(const ProbeFunction& f, const LimitProbe& probe);

// Forward limit residual at the deepest surviving translate plus the
// backward limit via double re-probing of f near t - b + b'.
BochnerVerdict bochner_test(const ProbeFunction& f, const LimitProbe& probe);

// sup_x |F(a_k;x) - F(a_k + delta_k; x)| -> 0 check along the family's
// pattern line; failure returns the witness pair.
UcReport uniform_continuity_test(const ProbeFunction& f, const LimitProbe& probe, const UcOptions& opts = {});

// Pointwise Bochner test, uniform-continuity test, and a uniform-window
// variant (refined grid + a window recentred on the continuity witness);
// reports agreement of compact <-> pointwise && uniformly continuous.
CompactReport compactness_equivalence_check(const ProbeFunction& f, const LimitProbe& probe,
                                            const UcOptions& uc_opts = {});

// sup over everything vs sup over |t| >= a, both by dense sampling along
// rays; family must satisfy the unboundedness condition.
SupremumResult supremum_formula_check(const ProbeFunction& f, const SequenceFamily& family, double a,
                                      double window_radius, double spacing = 1e-3,
                                      std::uint64_t seed = 0x13198A2E03707344ULL);

// Estimates the almost-automorphic part G by cluster limits along large
// translates, sets Q = f - G, and checks Q decays along the domain.
DecomposeResult asymptotic_decompose(const ProbeFunction& f, const SequenceFamily& family,
                                     const DomainDescriptor& domain, const GridWindow& window,
                                     const DecomposeOptions& opts, std::uint64_t seed = 0xA4093822299F31D0ULL);

// Central finite-difference partial derivative along `axis` as a derived
// expression, then the Bochner test on it.
BochnerVerdict derivative_aa_check(const FunctionExpr& f, int axis, const LimitProbe& probe, double h_fd);

// Pointwise AA-part evaluator backed by a survivor set (used by the decay
// checks and by downstream modules).
std::vector<double> aa_part_estimate(const ProbeFunction& f, const SubseqResult& sub,
                                     std::span<const double> t, double tol_subseq);

} // namespace multiauto

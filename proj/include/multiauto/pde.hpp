#pragma once

#include <string>
#include <vector>

#include "multiauto/sequence_limits.hpp"
#include "multiauto/volterra.hpp"

namespace multiauto {

struct HeatConfig {
    int dim = 1; // 1 or 2
    double time = 1.0;
    FunctionExpr initial; // bounded, sup_bound required
    QuadratureScheme quadrature;

    void validate() const;
    double truncation_radius() const; // Gaussian-tail bound, scales with sqrt(t)
};

// Fundamental solution (4 pi t)^{-n/2} exp(-|xi|^2 / (4t)).
double heat_kernel(std::span<const double> xi, double t);

// u(x, t) = int Phi(x - y, t) g(y) dy by truncated Gaussian-weighted
// quadrature; the kernel mass on the truncated box is checked against 1.
SampledGrid heat_solve(const HeatConfig& cfg, const GridWindow& x_grid);

// The same solution as an evaluable function of x.
ProbeFunction heat_solution(const HeatConfig& cfg);

struct HeatAaReport {
    BochnerVerdict initial;
    BochnerVerdict solution;
    bool passed = false;
    std::vector<std::string> notes;
};

// Convolution with the unit-mass heat kernel preserves the limit property;
// verified by running the Bochner test on data and solution at the same
// tolerance.
HeatAaReport heat_preserves_aa_check(const HeatConfig& cfg, const LimitProbe& probe);

struct PoissonReport {
    BochnerVerdict f_verdict;  // on the finite-difference Laplacian of u
    CompactReport u_report;    // compactness checks on u itself
    double fd_richardson = 0.0; // observed |f_h - f_2h| spot estimate
    bool passed = false;
    std::vector<std::string> notes;
};

// Synthetic direction check: given a bounded smooth u, derive f = Laplacian u
// by central differences, test f for the limit property and u for the
// compact (uniform) variant. Constructs the pair rather than solving the
// elliptic problem, which is ill-posed to produce numerically on R^n.
PoissonReport poisson_synthetic_check(const FunctionExpr& u, const LimitProbe& probe, double h_fd = 1e-3);

} // namespace multiauto

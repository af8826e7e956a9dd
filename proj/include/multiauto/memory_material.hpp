#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "multiauto/expr.hpp"
#include "multiauto/fixed_point.hpp"

namespace multiauto {

// Finite-dimensional integrodifferential system
//   u'(t) = A u(t) + int_0^t B(t-s) u(s) ds + f(t, u(t)),  u(0) = u0 + g(u),
// with the structured memory kernel B(t) = profile(t) * A.
struct MemorySystem {
    int dim = 1;
    Eigen::MatrixXd A;
    FunctionExpr profile; // scalar decay profile; only read when has_memory
    bool has_memory = false;
    FunctionExpr f; // forcing (t; u in R^d) -> R^d; only read when has_forcing
    bool has_forcing = false;
    double lip_f = 0.0;
    std::function<Eigen::VectorXd(const std::vector<Eigen::VectorXd>&)> g_nonlocal; // may be empty
    double lip_g = 0.0;
    Eigen::VectorXd u0;

    void validate() const;
    Eigen::MatrixXd B(double t) const; // profile(t) * A (zero when no memory)

    // Dirichlet finite-difference Laplacian on d interior points, spacing h.
    static MemorySystem laplacian1d(int d, double h);

    // Spot check of the decay-profile bounds |F(t)|, |F'(t)| <= bound * e^{-gamma t}.
    bool profile_within(double gamma, double bound, double t_max = 5.0) const;
};

struct ResolventTable {
    std::vector<double> times;
    std::vector<Eigen::MatrixXd> R_values;
    double step = 0.0;
    double M_est = 0.0, delta_est = 0.0;
    double halving_err = 0.0; // sup difference against the half-step run
    std::vector<double> norms; // spectral norms per grid time

    Eigen::MatrixXd at(double t) const; // linear interpolation in t
};

// Integrates R(0) = I, R' = A R + int_0^t B(t-s) R(s) ds with a Heun
// predictor-corrector and trapezoidal memory sums; records the half-step
// discrepancy and a log-linear decay-envelope fit over the tail half.
ResolventTable build_resolvent(const MemorySystem& sys, double t_max, double dt,
                               bool require_decay = false);

struct PropertyRReport {
    double M_est = 0.0, delta_est = 0.0;
    bool passed = false;
    double worst_excess = 0.0; // max ||R(t)|| / (M e^{-delta t}) over the grid
};

// Uniform exponential stability of the table: fitted envelope holds with 5%
// slack at every grid time and the decay rate is positive.
PropertyRReport verify_property_R(const ResolventTable& table);

struct MildSolveResult {
    IterationTrace trace;
    std::vector<double> times;
    std::vector<Eigen::VectorXd> u;  // converged trajectory
    std::vector<Eigen::VectorXd> y0; // first Picard iterate (the anchor trajectory)
    double ball_gap = 0.0;           // sup_t ||u(t) - y0(t)||_inf
    bool ball_ok = false;
};

// Picard iteration on u(t) = R(t)(u0 + g(u)) + int_0^t R(t-s) f(s, u(s)) ds,
// certified by theta = M L_g + (M / delta) L_f.
MildSolveResult solve_mild_nonlocal(const MemorySystem& sys, const ResolventTable& table, double horizon,
                                    double tol, double rho);

} // namespace multiauto

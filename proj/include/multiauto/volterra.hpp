#pragma once

#include <string>
#include <vector>

#include "multiauto/quadrature.hpp"
#include "multiauto/sequence_limits.hpp"
#include "multiauto/types.hpp"

namespace multiauto {

struct KernelSpec {
    enum class Decay { Exponential, IntegrableDeclared, None };
    int dim = 1;
    FunctionExpr expr; // function of the difference vector r
    Decay decay = Decay::Exponential;
    std::vector<double> rates;  // per-axis exponential rates
    double decay_scale = 1.0;   // C in |K(r)| <= C exp(-sum rates|r_i|)
    bool singular = false;

    double eval(std::span<const double> r) const { return expr.eval_scalar(r); }

    static KernelSpec product_exponential(const std::vector<double>& alphas);
    static KernelSpec biexponential(const std::vector<double>& alphas); // e^{-sum alpha|r_i|}
};

struct QuadratureScheme {
    enum class Rule { Trapezoid, GaussLegendre };
    Rule rule = Rule::GaussLegendre;
    int panels_per_unit = 1;
    double eps_tail = 1e-8;
    double fallback_radius = 40.0;  // used when no exponential decay is declared
    double picard_spacing = 0.025;  // iteration-grid spacing of the fixed-point solvers
};

// Per-axis truncation radii from the analytic exponential tail bound (never
// from sampling).
std::vector<double> truncation_radii(const KernelSpec& k, const QuadratureScheme& q);

struct E1Report {
    double sup_estimate = 0.0;
    bool passed = false;
    bool translation_invariant = true;
    std::vector<double> per_sample;
    std::vector<std::string> notes;
};

// sup_t int_{I_t} K(t - eta) d eta, via the r = t - eta substitution over the
// truncated positive orthant; stability checked by truncation doubling.
E1Report verify_E1(const KernelSpec& k, const QuadratureScheme& q,
                   const std::vector<std::vector<double>>& t_samples, bool use_abs = false);

struct E2E3Report {
    std::vector<double> radii;
    std::vector<double> e2_integrals;               // int over I_t \cap D^c at |t| = radius
    std::vector<std::vector<double>> e3_integrals;  // per radius, per ball radius r
    std::vector<double> ball_radii;
    bool degenerate_interior = false;
    bool passed = false;
    std::vector<std::string> notes;
};

E2E3Report verify_E2_E3(const KernelSpec& k, const DomainDescriptor& d, const QuadratureScheme& q,
                        const std::vector<double>& radii, const std::vector<double>& ball_radii = {1, 2, 5, 10});

// (h * F)(t) = int_{R^n} h(sigma) F(t - sigma) d sigma, truncated.
std::vector<double> whole_space_convolve(const KernelSpec& h, const ProbeFunction& f,
                                         std::span<const double> t, const QuadratureScheme& q);

// Causal integral operator Gamma f(t) = int_{D_t} K(t - eta) f(eta) d eta.
class GammaOperator {
public:
    GammaOperator(KernelSpec k, DomainDescriptor d, QuadratureScheme q);

    double value(const ProbeFunction& f, std::span<const double> t) const;
    double kernel_mass() const { return mass_; }
    double eps_tail() const { return quad_.eps_tail; }
    const std::vector<double>& radii() const { return radii_; }

    ProbeFunction as_probe(const ProbeFunction& f) const; // Gamma f as an evaluable function

private:
    KernelSpec kernel_;
    DomainDescriptor domain_;
    QuadratureScheme quad_;
    std::vector<double> radii_;
    double mass_ = 0.0;
};

struct SampledGrid {
    GridWindow window;
    std::vector<double> values;
    double err_bound = 0.0;
};

SampledGrid gamma_apply(const KernelSpec& k, const DomainDescriptor& d, const ProbeFunction& f,
                        const GridWindow& window, const QuadratureScheme& q);

// Theorem-style preservation checks on Gamma f, with tolerances inflated by
// the kernel mass and the truncation budget.
BochnerVerdict gamma_aa_check(const KernelSpec& k, const DomainDescriptor& d, const ProbeFunction& f,
                              const LimitProbe& probe);
DecomposeResult gamma_asymptotic_check(const KernelSpec& k, const DomainDescriptor& d, const ProbeFunction& f,
                                       const SequenceFamily& family, const GridWindow& window,
                                       const DecomposeOptions& opts);

} // namespace multiauto

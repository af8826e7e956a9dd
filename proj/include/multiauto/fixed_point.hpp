#pragma once

#include <string>
#include <vector>

#include "multiauto/sequence_limits.hpp"
#include "multiauto/volterra.hpp"

namespace multiauto {

struct ContractionCertificate {
    double lip_outer = 0.0;
    double lip_inner = 0.0;
    double kernel_mass = 0.0;
    double theta = 0.0;
    bool valid = false;

    static ContractionCertificate make(double lip_outer, double lip_inner, double kernel_mass) {
        ContractionCertificate c;
        c.lip_outer = lip_outer;
        c.lip_inner = lip_inner;
        c.kernel_mass = kernel_mass;
        c.theta = lip_outer + lip_inner * kernel_mass;
        c.valid = c.theta < 1.0;
        return c;
    }
    void require() const {
        if (!valid)
            throw CertificateInvalid("theta=" + std::to_string(theta) + " (needs theta < 1)");
    }
};

struct IterationTrace {
    SampledGrid prev;   // second-to-last iterate on the reporting window
    SampledGrid final;  // converged iterate on the reporting window
    std::vector<double> sup_diffs;
    double residual = 0.0; // ||u - Gamma u|| on the iteration grid after convergence
    int k_final = 0;
    ContractionCertificate certificate;
    double quad_err = 0.0; // measured against a brute-force quadrature spot check
    ProbeFunction solution;
    bool has_asymptotic = false;
    DecomposeResult asymptotic;
    std::vector<std::string> notes;
};

// u(t) = int_{R^l} G(t, s; u(s)) ds with Lipschitz majorant lam; grid-aligned
// composite Simpson over [window - T, window + T], boundary clamp outside.
IterationTrace solve_bikernel(const FunctionExpr& G, const KernelSpec& lam, const GridWindow& window,
                              const QuadratureScheme& q, double tol);

// u(t) = g(t) + int_{eta <= t} k(t-eta) h(eta, u(eta)) deta on R^2.
// k must be (a scalar multiple of) a separable exponential on the cone; each
// sweep then runs in O(grid) via per-axis exponential-weighted recursions.
IterationTrace solve_vie_infinite_delay(const FunctionExpr& g, const FunctionExpr& h, const KernelSpec& k,
                                        const GridWindow& window, const QuadratureScheme& q, double tol);

// u(t) = g(t; u(t)) + int_{[corner, t]} k(t-eta) h(eta, u(eta)) deta on an
// orthant; afterwards runs asymptotic_decompose on the solution.
IterationTrace solve_vie_asymptotic(const FunctionExpr& g, const FunctionExpr& h, const KernelSpec& k,
                                    const DomainDescriptor& d, const GridWindow& window,
                                    const QuadratureScheme& q, double tol, const SequenceFamily& family,
                                    const DecomposeOptions& dec_opts);

// Max ratio of consecutive sup_diffs above the noise floor 10*quad_err;
// throws if fewer than 3 sweeps or if the ratio exceeds theta * 1.1.
double estimate_observed_ratio(const IterationTrace& trace);

} // namespace multiauto

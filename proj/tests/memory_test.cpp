#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <unsupported/Eigen/MatrixFunctions>

#include "multiauto/memory_material.hpp"

using namespace multiauto;

namespace {

const double kSqrt2 = std::sqrt(2.0);

// A = -2, B(t) = -e^{-t} (profile e^{-t}/2 against A); u'(t) = -2u - int e^{-(t-s)} u(s) ds
MemorySystem scalar_memory_system() {
    MemorySystem sys;
    sys.dim = 1;
    sys.A = Eigen::MatrixXd::Constant(1, 1, -2.0);
    sys.profile = FunctionExpr(1, 0, {e_mul(e_const(0.5), e_exp(e_neg(e_time(0))))});
    sys.has_memory = true;
    sys.u0 = Eigen::VectorXd::Constant(1, 1.0);
    return sys;
}

// Exact augmentation of the scalar memory system: w(t) = int_0^t e^{-(t-s)} R(s) ds
// gives the plain ODE pair R' = -2R - w, w' = R - w. Classical 4th-order steps.
double resolvent_oracle(double t_query, double dt = 1e-4) {
    double R = 1.0, w = 0.0, t = 0.0;
    auto f = [](double r, double ww, double& dr, double& dw) {
        dr = -2.0 * r - ww;
        dw = r - ww;
    };
    auto n = static_cast<long>(std::llround(t_query / dt));
    for (long k = 0; k < n; ++k) {
        double k1r, k1w, k2r, k2w, k3r, k3w, k4r, k4w;
        f(R, w, k1r, k1w);
        f(R + 0.5 * dt * k1r, w + 0.5 * dt * k1w, k2r, k2w);
        f(R + 0.5 * dt * k2r, w + 0.5 * dt * k2w, k3r, k3w);
        f(R + dt * k3r, w + dt * k3w, k4r, k4w);
        R += dt / 6.0 * (k1r + 2 * k2r + 2 * k3r + k4r);
        w += dt / 6.0 * (k1w + 2 * k2w + 2 * k3w + k4w);
        t += dt;
    }
    return R;
}

} // namespace

TEST_CASE("system validation") {
    MemorySystem sys;
    sys.dim = 2;
    sys.A = Eigen::MatrixXd::Identity(1, 1);
    sys.u0 = Eigen::VectorXd::Zero(2);
    CHECK_THROWS_AS(sys.validate(), DimensionMismatch);
    sys.A = -Eigen::MatrixXd::Identity(2, 2);
    sys.u0 = Eigen::VectorXd::Zero(3);
    CHECK_THROWS_AS(sys.validate(), DimensionMismatch);
    sys.u0 = Eigen::VectorXd::Zero(2);
    CHECK_NOTHROW(sys.validate());
    CHECK(sys.B(1.3).isZero());
}

TEST_CASE("memoryless scalar system reproduces e^{-t}") {
    MemorySystem sys;
    sys.dim = 1;
    sys.A = -Eigen::MatrixXd::Identity(1, 1);
    sys.u0 = Eigen::VectorXd::Zero(1);
    auto table = build_resolvent(sys, 5.0, 1e-3);
    CHECK(table.R_values.front().isIdentity(0.0));
    for (double t : {0.5, 1.0, 3.0, 5.0})
        CHECK(table.at(t)(0, 0) == doctest::Approx(std::exp(-t)).epsilon(1e-6));
    CHECK(table.M_est == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(table.delta_est == doctest::Approx(1.0).epsilon(1e-3));
    auto rep = verify_property_R(table);
    CHECK(rep.passed);
    CHECK_THROWS_AS(table.at(6.0), HorizonExceedsTable);
}

TEST_CASE("memoryless diffusion block matches the matrix exponential") {
    MemorySystem sys = MemorySystem::laplacian1d(8, 2.0);
    auto table = build_resolvent(sys, 5.0, 1e-3);
    for (double t : {1.0, 2.5, 5.0}) {
        Eigen::MatrixXd exact = (t * sys.A).exp();
        CHECK((table.at(t) - exact).cwiseAbs().maxCoeff() <= 1e-6);
    }
    CHECK(verify_property_R(table).passed);
}

TEST_CASE("scalar memory system matches the augmented-pair integration") {
    MemorySystem sys = scalar_memory_system();
    auto table = build_resolvent(sys, 5.0, 5e-3);
    CHECK(table.halving_err <= 1e-4);
    for (double t : {0.5, 1.0, 2.0})
        CHECK(std::abs(table.at(t)(0, 0) - resolvent_oracle(t)) <= 1e-4);
    CHECK(table.delta_est > 0.0);
    auto rep = verify_property_R(table);
    CHECK(rep.passed);
    CHECK(rep.delta_est > 1.0); // spectral abscissa of the pair is -3/2
}

TEST_CASE("unstable generator fails the decay checks") {
    MemorySystem sys;
    sys.dim = 1;
    sys.A = Eigen::MatrixXd::Identity(1, 1); // +1: pure growth
    sys.u0 = Eigen::VectorXd::Zero(1);
    auto table = build_resolvent(sys, 5.0, 1e-3);
    CHECK_FALSE(verify_property_R(table).passed);
    CHECK_THROWS_AS(build_resolvent(sys, 5.0, 1e-3, /*require_decay=*/true), NoDecay);
}

TEST_CASE("coarse steps are refused by the stability gate") {
    MemorySystem sys = MemorySystem::laplacian1d(8, 0.1); // ||A|| about 400
    CHECK_THROWS_AS(build_resolvent(sys, 5.0, 1e-2), StepUnstable);
}

TEST_CASE("unforced local problem returns the resolvent orbit") {
    MemorySystem sys;
    sys.dim = 1;
    sys.A = -Eigen::MatrixXd::Identity(1, 1);
    sys.u0 = Eigen::VectorXd::Constant(1, 1.0);
    auto table = build_resolvent(sys, 5.0, 1e-3);
    auto res = solve_mild_nonlocal(sys, table, 4.0, 1e-8, 2.0);
    CHECK(res.trace.k_final <= 2);
    for (std::size_t k = 0; k < res.u.size(); k += 500)
        CHECK(res.u[k](0) == doctest::Approx(table.R_values[k](0, 0)).epsilon(1e-12));
    CHECK(res.ball_ok);
    CHECK_THROWS_AS(solve_mild_nonlocal(sys, table, 6.0, 1e-8, 2.0), HorizonExceedsTable);
}

TEST_CASE("nonlocal forced problem converges within its certificate") {
    MemorySystem sys = scalar_memory_system();
    // f(t, u) = 0.05 (sin t + sin sqrt2 t) atan(u), 0.05-Lipschitz
    sys.f = FunctionExpr(
        1, 1,
        {e_mul(e_const(0.05),
               e_mul(e_add(e_sin(e_time(0)), e_sin(e_mul(e_const(kSqrt2), e_time(0)))),
                     e_atan(e_state(0))))});
    sys.has_forcing = true;
    sys.lip_f = 0.05;
    // g(u) = 0.05 * clipped trajectory mean: nonlocal, 0.05-Lipschitz in sup norm
    sys.g_nonlocal = [](const std::vector<Eigen::VectorXd>& traj) {
        double mean = 0.0;
        for (const auto& v : traj) mean += v(0);
        mean /= static_cast<double>(traj.size());
        return Eigen::VectorXd::Constant(1, 0.05 * std::clamp(mean, -1.0, 1.0));
    };
    sys.lip_g = 0.05;

    // longer table: the envelope fit sees two full oscillation periods
    auto table = build_resolvent(sys, 15.0, 5e-3, /*require_decay=*/true);
    const double tol = 1e-6;
    auto res = solve_mild_nonlocal(sys, table, 5.0, tol, 1.0);
    const auto& cert = res.trace.certificate;
    CHECK(cert.theta < 0.5);
    CHECK(res.trace.residual <= tol / (1.0 - cert.theta) + 1e-4);
    double ratio = estimate_observed_ratio(res.trace); // asserts <= 1.1 theta
    CHECK(ratio <= 1.1 * cert.theta);
    CHECK(res.ball_ok); // iterates stay in the rho-ball around the anchor
    CHECK(res.ball_gap <= cert.theta / (1.0 - cert.theta) * 1.1 + 1e-6);
}

TEST_CASE("over-unit nonlocal Lipschitz budget is rejected") {
    MemorySystem sys;
    sys.dim = 1;
    sys.A = -Eigen::MatrixXd::Identity(1, 1);
    sys.u0 = Eigen::VectorXd::Constant(1, 1.0);
    sys.g_nonlocal = [](const std::vector<Eigen::VectorXd>& traj) {
        return Eigen::VectorXd::Constant(1, 2.0 * traj.back()(0));
    };
    sys.lip_g = 2.0;
    auto table = build_resolvent(sys, 5.0, 1e-3);
    CHECK_THROWS_AS(solve_mild_nonlocal(sys, table, 4.0, 1e-8, 1.0), CertificateInvalid);
}

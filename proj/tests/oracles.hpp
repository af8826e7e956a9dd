#pragma once

// Independent reference solvers used only by the tests. These deliberately
// share no code with the library: different grids, different quadrature
// (composite Simpson instead of exponentially weighted recursions /
// Gauss-Legendre), and a direct dense linearization where feasible.

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "multiauto/parallel.hpp"

namespace oracles {

// Composite Simpson weights on [0, len] with an even number of cells.
inline std::vector<double> simpson_weights(int cells, double h) {
    if (cells % 2 != 0) throw std::runtime_error("simpson_weights needs an even cell count");
    std::vector<double> w(cells + 1);
    for (int i = 0; i <= cells; ++i) {
        double c = (i == 0 || i == cells) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
        w[i] = c * h / 3.0;
    }
    return w;
}

// Collocation solve of u(t) = g(t) + int_{eta <= t} s * e^{-a(t1-e1)-b(t2-e2)}
// h(eta, u(eta)) deta on a uniform grid, by fixed-point sweeps with
// grid-aligned Simpson quadrature and separable correlation passes.
struct Vie2dOracle {
    double lo_x, lo_y, hi_x, hi_y; // comparison region
    double spacing = 0.025;
    double trunc = 16.0;
    double alpha = 1.0, beta = 1.0, scale = 1.0;
    std::function<double(double, double)> g;
    std::function<double(double, double, double)> h; // (eta1, eta2, u)

    int nx = 0, ny = 0;
    double x0 = 0, y0 = 0;
    std::vector<double> u;

    double at(double x, double y) const {
        int i = static_cast<int>(std::llround((x - x0) / spacing));
        int j = static_cast<int>(std::llround((y - y0) / spacing));
        if (i < 0 || j < 0 || i >= nx || j >= ny) throw std::runtime_error("oracle query off grid");
        return u[static_cast<std::size_t>(i) * ny + j];
    }

    void solve(double tol = 1e-12, int max_sweeps = 60) {
        int cells = static_cast<int>(std::llround(trunc / spacing));
        if (cells % 2 != 0) ++cells;
        std::vector<double> wq = simpson_weights(cells, spacing);
        std::vector<double> kx(cells + 1), ky(cells + 1);
        for (int i = 0; i <= cells; ++i) {
            kx[i] = wq[i] * std::exp(-alpha * i * spacing);
            ky[i] = wq[i] * std::exp(-beta * i * spacing);
        }

        x0 = std::floor((lo_x - trunc) / spacing) * spacing;
        y0 = std::floor((lo_y - trunc) / spacing) * spacing;
        nx = static_cast<int>(std::ceil((hi_x - x0) / spacing)) + 2;
        ny = static_cast<int>(std::ceil((hi_y - y0) / spacing)) + 2;
        const std::size_t N = static_cast<std::size_t>(nx) * ny;

        std::vector<double> gval(N);
        for (int i = 0; i < nx; ++i)
            for (int j = 0; j < ny; ++j)
                gval[static_cast<std::size_t>(i) * ny + j] = g(x0 + i * spacing, y0 + j * spacing);

        u.assign(N, 0.0);
        std::vector<double> w(N), s1(N), unew(N);
        for (int sweep = 0; sweep < max_sweeps; ++sweep) {
            for (int i = 0; i < nx; ++i)
                for (int j = 0; j < ny; ++j) {
                    std::size_t idx = static_cast<std::size_t>(i) * ny + j;
                    w[idx] = h(x0 + i * spacing, y0 + j * spacing, u[idx]);
                }
            // y-direction correlation, then x-direction (mass below the grid
            // edge is dropped; it is exponentially small at the window)
            multiauto::parallel_for(static_cast<std::size_t>(nx), [&](std::size_t i) {
                for (int j = 0; j < ny; ++j) {
                    double acc = 0.0;
                    int jmax = std::min(cells, j);
                    for (int r = 0; r <= jmax; ++r) acc += ky[r] * w[i * ny + (j - r)];
                    s1[i * ny + j] = acc;
                }
            });
            multiauto::parallel_for(static_cast<std::size_t>(nx), [&](std::size_t i) {
                for (int j = 0; j < ny; ++j) {
                    double acc = 0.0;
                    int imax = std::min(cells, static_cast<int>(i));
                    for (int r = 0; r <= imax; ++r) acc += kx[r] * s1[(i - r) * ny + j];
                    std::size_t idx = i * ny + j;
                    unew[idx] = gval[idx] + scale * acc;
                }
            });
            double diff = 0.0;
            for (std::size_t idx = 0; idx < N; ++idx)
                diff = std::max(diff, std::abs(unew[idx] - u[idx]));
            u.swap(unew);
            if (diff <= tol) return;
        }
        throw std::runtime_error("oracle fixed point did not converge");
    }
};

// Damped Newton on the dense collocation system for
// u(t) = int_R G(t, s; u(s)) ds, one time dimension, scalar state.
struct Bikernel1dOracle {
    double lo, hi;           // comparison region
    double spacing = 0.05;
    double trunc = 17.0;     // integration reach beyond the region
    std::function<double(double, double, double)> G;    // (t, s, x)
    std::function<double(double, double, double)> dGdx; // analytic derivative

    double s0 = 0;
    int n = 0;
    Eigen::VectorXd u;

    double at(double t) const {
        int i = static_cast<int>(std::llround((t - s0) / spacing));
        if (i < 0 || i >= n) throw std::runtime_error("oracle query off grid");
        return u(i);
    }

    void solve(double tol = 1e-12, int max_newton = 40) {
        s0 = std::floor((lo - trunc) / spacing) * spacing;
        int cells = static_cast<int>(std::ceil((hi + trunc - s0) / spacing));
        if (cells % 2 != 0) ++cells;
        n = cells + 1;
        std::vector<double> wq = simpson_weights(cells, spacing);

        u = Eigen::VectorXd::Zero(n);
        auto residual = [&](const Eigen::VectorXd& v, Eigen::VectorXd& F) {
            for (int i = 0; i < n; ++i) {
                double ti = s0 + i * spacing, acc = 0.0;
                for (int j = 0; j < n; ++j) acc += wq[j] * G(ti, s0 + j * spacing, v(j));
                F(i) = v(i) - acc;
            }
        };
        Eigen::VectorXd F(n), Fnew(n), step(n);
        residual(u, F);
        for (int it = 0; it < max_newton; ++it) {
            if (F.lpNorm<Eigen::Infinity>() <= tol) return;
            Eigen::MatrixXd J = Eigen::MatrixXd::Identity(n, n);
            for (int i = 0; i < n; ++i) {
                double ti = s0 + i * spacing;
                for (int j = 0; j < n; ++j) J(i, j) -= wq[j] * dGdx(ti, s0 + j * spacing, u(j));
            }
            step = J.partialPivLu().solve(F);
            double lambda = 1.0;
            for (int half = 0; half < 30; ++half) {
                Eigen::VectorXd trial = u - lambda * step;
                residual(trial, Fnew);
                if (Fnew.lpNorm<Eigen::Infinity>() < F.lpNorm<Eigen::Infinity>()) {
                    u = trial;
                    F = Fnew;
                    break;
                }
                lambda *= 0.5;
                if (half == 29) throw std::runtime_error("oracle Newton stalled");
            }
        }
        if (F.lpNorm<Eigen::Infinity>() > tol) throw std::runtime_error("oracle Newton did not converge");
    }
};

} // namespace oracles

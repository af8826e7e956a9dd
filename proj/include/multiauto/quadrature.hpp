#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

namespace multiauto {

// Gauss-Legendre nodes/weights on [-1, 1].
inline constexpr std::array<double, 8> kGL8Nodes = {
    -0.9602898564975363, -0.7966664774136267, -0.5255324099163290, -0.1834346424956498,
    0.1834346424956498,  0.5255324099163290,  0.7966664774136267,  0.9602898564975363};
inline constexpr std::array<double, 8> kGL8Weights = {
    0.1012285362903763, 0.2223810344533745, 0.3137066458778873, 0.3626837833783620,
    0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};

// Composite Gauss-Legendre 8 over [a, b], panels_per_unit panels per unit length
// (at least one panel). Handles a > b with the usual sign.
template <typename F>
double integrate_gl8(F&& f, double a, double b, int panels_per_unit = 1) {
    if (a == b) return 0.0;
    double sign = 1.0;
    if (a > b) {
        std::swap(a, b);
        sign = -1.0;
    }
    double len = b - a;
    int panels = std::max(1, static_cast<int>(std::ceil(len * panels_per_unit)));
    double h = len / panels;
    double sum = 0.0;
    for (int p = 0; p < panels; ++p) {
        double mid = a + (p + 0.5) * h;
        double acc = 0.0;
        for (int i = 0; i < 8; ++i) acc += kGL8Weights[i] * f(mid + 0.5 * h * kGL8Nodes[i]);
        sum += 0.5 * h * acc;
    }
    return sign * sum;
}

// Composite trapezoid with n+1 equispaced nodes.
template <typename F>
double integrate_trapezoid(F&& f, double a, double b, int n) {
    if (n < 1) n = 1;
    double h = (b - a) / n;
    double sum = 0.5 * (f(a) + f(b));
    for (int i = 1; i < n; ++i) sum += f(a + i * h);
    return sum * h;
}

// 1D quadrature node/weight table, reusable across many integrand evaluations.
struct NodeTable {
    std::vector<double> nodes;
    std::vector<double> weights;

    static NodeTable gl8(double a, double b, int panels_per_unit) {
        NodeTable t;
        if (b <= a) return t;
        int panels = std::max(1, static_cast<int>(std::ceil((b - a) * panels_per_unit)));
        double h = (b - a) / panels;
        t.nodes.reserve(static_cast<std::size_t>(panels) * 8);
        t.weights.reserve(static_cast<std::size_t>(panels) * 8);
        for (int p = 0; p < panels; ++p) {
            double mid = a + (p + 0.5) * h;
            for (int i = 0; i < 8; ++i) {
                t.nodes.push_back(mid + 0.5 * h * kGL8Nodes[i]);
                t.weights.push_back(0.5 * h * kGL8Weights[i]);
            }
        }
        return t;
    }

    static NodeTable trapezoid(double a, double b, int n) {
        NodeTable t;
        if (b <= a || n < 1) return t;
        double h = (b - a) / n;
        for (int i = 0; i <= n; ++i) {
            t.nodes.push_back(a + i * h);
            t.weights.push_back((i == 0 || i == n) ? 0.5 * h : h);
        }
        return t;
    }
};

} // namespace multiauto

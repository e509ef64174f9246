#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

namespace bmv {

/// Sobolev index lambda as a function of the dimension:
/// floor(d/2)+4 when d mod 4 is 0 or 1, floor(d/2)+3 otherwise.
struct LambdaIndex {
    int d = 1;
    int lambda = 4;

    static LambdaIndex for_dim(int d) {
        if (d < 1) throw std::invalid_argument("LambdaIndex: dimension must be positive");
        int r = d % 4;
        int lam = d / 2 + ((r == 0 || r == 1) ? 4 : 3);
        return {d, lam};
    }
};

enum class QuadratureMode { closed_form_d1, truncated_grid };

/// Discretization of the frequency integral over R^d: composite
/// Gauss-Legendre panels on [-R, R] per axis. nodes_per_axis counts the
/// total nodes per axis (rounded up to whole panels).
struct QuadratureScheme {
    QuadratureMode mode = QuadratureMode::truncated_grid;
    double radius = 50.0;
    std::size_t nodes_per_axis = 20000;

    static QuadratureScheme closed_form() { return {QuadratureMode::closed_form_d1, 50.0, 20000}; }
    static QuadratureScheme grid(double radius, std::size_t nodes) {
        return {QuadratureMode::truncated_grid, radius, nodes};
    }
};

namespace detail {
// 10-point Gauss-Legendre on [-1,1].
inline constexpr std::array<double, 5> gl10_x = {
    0.1488743389816312, 0.4333953941292472, 0.6794095682990244,
    0.8650633666889845, 0.9739065285171717};
inline constexpr std::array<double, 5> gl10_w = {
    0.2955242247147529, 0.2692667193099963, 0.2190863625159820,
    0.1494513491505806, 0.0666713443086881};
}  // namespace detail

/// Integral of f over [a,b] with composite 10-point Gauss-Legendre panels.
inline double integrate_1d(const std::function<double(double)>& f, double a, double b,
                           std::size_t nodes) {
    std::size_t panels = std::max<std::size_t>(1, (nodes + 9) / 10);
    double h = (b - a) / static_cast<double>(panels);
    double total = 0.0;
    for (std::size_t p = 0; p < panels; ++p) {
        double c = a + (static_cast<double>(p) + 0.5) * h;
        double half = 0.5 * h;
        double s = 0.0;
        for (std::size_t i = 0; i < 5; ++i) {
            double dx = half * detail::gl10_x[i];
            s += detail::gl10_w[i] * (f(c - dx) + f(c + dx));
        }
        total += half * s;
    }
    return total;
}

/// Nodes and weights of the same composite rule, for callers that sweep
/// a tensor grid themselves.
inline void gauss_nodes_1d(double a, double b, std::size_t nodes, std::vector<double>& xs,
                           std::vector<double>& ws) {
    std::size_t panels = std::max<std::size_t>(1, (nodes + 9) / 10);
    double h = (b - a) / static_cast<double>(panels);
    xs.clear();
    ws.clear();
    for (std::size_t p = 0; p < panels; ++p) {
        double c = a + (static_cast<double>(p) + 0.5) * h;
        double half = 0.5 * h;
        for (std::size_t i = 0; i < 5; ++i) {
            xs.push_back(c - half * detail::gl10_x[4 - i]);
            ws.push_back(half * detail::gl10_w[4 - i]);
        }
        for (std::size_t i = 0; i < 5; ++i) {
            xs.push_back(c + half * detail::gl10_x[i]);
            ws.push_back(half * detail::gl10_w[i]);
        }
    }
}

}  // namespace bmv

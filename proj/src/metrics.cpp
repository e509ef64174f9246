#include "bmv/metrics.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "bmv/transport.hpp"

namespace bmv {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct SignedAtom {
    Vec position;
    double coeff;
};

std::vector<SignedAtom> signed_difference(const AtomicMeasure& m1, const AtomicMeasure& m2) {
    std::vector<SignedAtom> out;
    out.reserve(m1.size() + m2.size());
    for (const auto& a : m1.atoms()) out.push_back({a.position, a.weight});
    for (const auto& a : m2.atoms()) out.push_back({a.position, -a.weight});
    return out;
}

double abs_coeff_sum(const std::vector<SignedAtom>& atoms) {
    double s = 0.0;
    for (const auto& a : atoms) s += std::abs(a.coeff);
    return s;
}

// |sum_j c_j exp(i n.z_j)|^2 at frequency n.
double char_sq(const std::vector<SignedAtom>& atoms, const Vec& n) {
    double re = 0.0, im = 0.0;
    for (const auto& a : atoms) {
        double phase = 0.0;
        for (std::size_t i = 0; i < n.size(); ++i) phase += n[i] * a.position[i];
        re += a.coeff * std::cos(phase);
        im += a.coeff * std::sin(phase);
    }
    return re * re + im * im;
}

// int_{|n|>R} (1+|n|^2)^{-lambda} dn <= S_d R^{d-2 lambda} / (2 lambda - d).
double weight_tail(int d, int lambda, double radius) {
    double surface = 2.0 * std::pow(std::numbers::pi, d / 2.0) / std::tgamma(d / 2.0);
    return surface * std::pow(radius, d - 2 * lambda) / (2.0 * lambda - d);
}

// Quadrature of int (1+|n|^2)^{-lambda} |sum c exp(i n.z)|^2 dn over the
// truncated box [-R,R]^d (tensor Gauss-Legendre grid).
double weighted_char_integral(const std::vector<SignedAtom>& atoms, const LambdaIndex& idx,
                              const QuadratureScheme& scheme) {
    std::vector<double> xs, ws;
    gauss_nodes_1d(-scheme.radius, scheme.radius, scheme.nodes_per_axis, xs, ws);
    const int d = idx.d;
    std::vector<std::size_t> index(d, 0);
    Vec n(d, 0.0);
    double total = 0.0;
    bool done = false;
    while (!done) {
        double w = 1.0;
        double norm_sq = 0.0;
        for (int i = 0; i < d; ++i) {
            n[i] = xs[index[i]];
            w *= ws[index[i]];
            norm_sq += n[i] * n[i];
        }
        total += w * char_sq(atoms, n) / std::pow(1.0 + norm_sq, idx.lambda);
        // advance the tensor index
        int axis = 0;
        for (;; ++axis) {
            if (axis == d) {
                done = true;
                break;
            }
            if (++index[axis] < xs.size()) break;
            index[axis] = 0;
        }
    }
    return total;
}

void check_dims(const AtomicMeasure& m1, const AtomicMeasure& m2, const LambdaIndex& idx) {
    if (m1.dim() != m2.dim() || m1.dim() != idx.d)
        throw std::invalid_argument("dimension mismatch between measures and lambda index");
}

}  // namespace

double matern_kernel_d1_lambda4(double r) {
    double a = std::abs(r);
    return std::numbers::pi * std::exp(-a) * (15.0 + a * (15.0 + a * (6.0 + a))) / 48.0;
}

MetricResult rho_F(const AtomicMeasure& m1, const AtomicMeasure& m2, const LambdaIndex& idx,
                   const QuadratureScheme& scheme) {
    check_dims(m1, m2, idx);
    auto atoms = signed_difference(m1, m2);
    if (scheme.mode == QuadratureMode::closed_form_d1) {
        if (idx.d != 1 || idx.lambda != 4)
            throw std::invalid_argument("scheme closed_form_d1 requires d=1, lambda=4");
        double sq = 0.0;
        for (const auto& ai : atoms)
            for (const auto& aj : atoms)
                sq += ai.coeff * aj.coeff * matern_kernel_d1_lambda4(ai.position[0] - aj.position[0]);
        sq /= kTwoPi;
        return {std::sqrt(std::max(sq, 0.0)), 0.0, "closed_form_d1"};
    }
    double prefactor = std::pow(kTwoPi, -idx.d);
    double sq = prefactor * weighted_char_integral(atoms, idx, scheme);
    double c = abs_coeff_sum(atoms);
    double tail = prefactor * c * c * weight_tail(idx.d, idx.lambda, scheme.radius);
    return {std::sqrt(std::max(sq, 0.0)), tail, "truncated_grid"};
}

MetricResult sobolev_neg_norm(const AtomicMeasure& m1, const AtomicMeasure& m2,
                              const LambdaIndex& idx, const QuadratureScheme& scheme) {
    check_dims(m1, m2, idx);
    auto atoms = signed_difference(m1, m2);
    if (scheme.mode == QuadratureMode::closed_form_d1) {
        if (idx.d != 1 || idx.lambda != 4)
            throw std::invalid_argument("scheme closed_form_d1 requires d=1, lambda=4");
        double sq = 0.0;
        for (const auto& ai : atoms)
            for (const auto& aj : atoms)
                sq += ai.coeff * aj.coeff * matern_kernel_d1_lambda4(ai.position[0] - aj.position[0]);
        return {std::sqrt(std::max(sq, 0.0)), 0.0, "closed_form_d1"};
    }
    double sq = weighted_char_integral(atoms, idx, scheme);
    double c = abs_coeff_sum(atoms);
    double tail = c * c * weight_tail(idx.d, idx.lambda, scheme.radius);
    return {std::sqrt(std::max(sq, 0.0)), tail, "truncated_grid"};
}

double domination_constant(const LambdaIndex& idx, double radius, std::size_t nodes) {
    if (idx.d != 1)
        throw std::invalid_argument("domination_constant: only d=1 is supported");
    double integral = integrate_1d(
        [&](double n) {
            double u = std::abs(n) + 3.0;
            return u * u / std::pow(1.0 + n * n, idx.lambda);
        },
        -radius, radius, nodes);
    return std::pow(kTwoPi, -idx.d / 2.0) * std::sqrt(integral);
}

DominationReport check_domination(const AtomicMeasure& m1, const AtomicMeasure& m2,
                                  const LambdaIndex& idx, const QuadratureScheme& scheme,
                                  const Vec& base_point) {
    DominationReport rep;
    rep.rho_f = rho_F(m1, m2, idx, scheme).value;
    rep.w1bar = truncated_w1(m1, m2, base_point);
    rep.constant_c = domination_constant(idx);
    rep.holds = rep.rho_f <= rep.constant_c * rep.w1bar + 1e-12;
    return rep;
}

}  // namespace bmv

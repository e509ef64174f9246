#pragma once

#include <string>
#include <vector>

#include "bmv/measure.hpp"
#include "bmv/quadrature.hpp"

namespace bmv {

/// Value of a frequency-domain metric together with the certified
/// truncation tail of the scheme that produced it.
struct MetricResult {
    double value = 0.0;
    double tail_bound = 0.0;
    std::string scheme;  // "closed_form_d1" or "truncated_grid"
};

/// Fourier-Wasserstein 2-distance:
///   rho_F^2(m1,m2) = int |F_n(m1-m2)|^2 / (1+|n|^2)^lambda dn,
/// with F_n(rho) = <(2pi)^{-d/2} e^{in.x}, rho>.
MetricResult rho_F(const AtomicMeasure& m1, const AtomicMeasure& m2, const LambdaIndex& idx,
                   const QuadratureScheme& scheme);

/// Negative Sobolev norm |m1-m2|_{-lambda} of the signed difference,
/// computed through its own quadrature of the plain Fourier transform.
/// Satisfies rho_F^2 = (2pi)^{-d} |m1-m2|^2_{-lambda}.
MetricResult sobolev_neg_norm(const AtomicMeasure& m1, const AtomicMeasure& m2,
                              const LambdaIndex& idx, const QuadratureScheme& scheme);

/// Matern-type kernel for d=1, lambda=4:
///   int cos(n r) (1+n^2)^{-4} dn = pi e^{-|r|} (15 + 15|r| + 6 r^2 + |r|^3) / 48.
double matern_kernel_d1_lambda4(double r);

/// Domination constant of the rho_F <= C * W1bar inequality:
///   C = (2pi)^{-d/2} ( int (|n|+3)^2 / (1+|n|^2)^lambda dn )^{1/2}.
/// Quadrature over |n| <= radius; only d=1 is supported.
double domination_constant(const LambdaIndex& idx, double radius = 200.0,
                           std::size_t nodes = 20000);

struct DominationReport {
    double rho_f = 0.0;
    double w1bar = 0.0;
    double constant_c = 0.0;
    bool holds = false;
};

DominationReport check_domination(const AtomicMeasure& m1, const AtomicMeasure& m2,
                                  const LambdaIndex& idx, const QuadratureScheme& scheme,
                                  const Vec& base_point);

}  // namespace bmv

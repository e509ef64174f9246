#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "bmv/model.hpp"
#include "bmv/policy.hpp"
#include "bmv/simulate.hpp"

namespace bmv {

/// Twice-differentiable scalar test field with analytically supplied
/// derivatives and a linear-growth certificate.
struct TestField {
    std::function<double(const Vec&)> value;
    std::function<Vec(const Vec&)> gradient;
    std::function<Mat(const Vec&)> hessian;
    double growth = 1.0;
};

TestField field_const(double c, int dim);
TestField field_coordinate(int dim, int axis = 0);
TestField field_norm_sq(int dim);

/// Smooth cylinder functional F(t, m) = f(t, <phi_1,m>, ..., <phi_K,m>).
/// The linear functional derivative and its space derivatives are
/// assembled exactly from the supplied pieces:
///   lfd(t,m,x) = sum_i d_{y_i} f(t, y(m)) phi_i(x).
class CylinderFunctional {
  public:
    struct Outer {
        std::function<double(double, const std::vector<double>&)> value;
        std::function<double(double, const std::vector<double>&)> dt;
        std::function<std::vector<double>(double, const std::vector<double>&)> dy;
    };

    CylinderFunctional(std::vector<TestField> inner, Outer outer)
        : inner_(std::move(inner)), outer_(std::move(outer)) {}

    /// Linear functional F(m) = <phi, m> (time-independent).
    static CylinderFunctional linear(TestField phi);
    /// F(m) = m(R^d)^2.
    static CylinderFunctional mass_squared(int dim);

    std::size_t arity() const { return inner_.size(); }
    const std::vector<TestField>& inner() const { return inner_; }

    std::vector<double> inner_integrals(const AtomicMeasure& m) const;
    double outer_value(double t, const std::vector<double>& y) const { return outer_.value(t, y); }
    double operator()(double t, const AtomicMeasure& m) const;
    double time_derivative(double t, const AtomicMeasure& m) const;

    double lfd(double t, const AtomicMeasure& m, const Vec& x) const;
    Vec lfd_gradient(double t, const AtomicMeasure& m, const Vec& x) const;
    Mat lfd_hessian(double t, const AtomicMeasure& m, const Vec& x) const;

    /// Same, with the outer-derivative weights precomputed for a fixed m.
    struct Frozen {
        const CylinderFunctional* f;
        std::vector<double> weights;  // d_{y_i} f at (t, y(m))
        double lfd(const Vec& x) const;
        Vec lfd_gradient(const Vec& x) const;
        Mat lfd_hessian(const Vec& x) const;
    };
    Frozen freeze(double t, const AtomicMeasure& m) const;

  private:
    std::vector<TestField> inner_;
    Outer outer_;
};

/// Generator of the measure flow applied to F at (t, m):
///   < b . grad lfd + 1/2 Tr(sigma sigma^T hess lfd)
///     + gamma sum_l (l-1) p_l lfd , m >.
double generator_apply(const ModelSpec& model, const Policy& policy, const CylinderFunctional& F,
                       double t, const AtomicMeasure& m);

// ---- Hamiltonian over a constant-action grid ----

struct HamiltonianFields {
    std::function<Vec(const Vec&)> p;     // pairs with the drift
    std::function<Mat(const Vec&)> q;     // pairs with sigma sigma^T
    std::function<double(const Vec&)> r;  // pairs with the branching multiplier
};

struct CostSpec;

struct HamiltonianResult {
    double value = 0.0;
    Vec argmin_action;
};

/// G restricted to constant actions on a finite grid:
///   min_a [ <L(t,.,m,a), m> + <b.p + 1/2 Tr(ssT q) + Gamma r, m> ].
/// The grid minimum dominates the true inf over state feedbacks.
HamiltonianResult hamiltonian_G(const ModelSpec& model, const CostSpec& cost, double t,
                                const AtomicMeasure& m, const HamiltonianFields& fields,
                                const std::vector<Vec>& action_grid);

/// Default grid: n points per axis of the action box.
std::vector<Vec> action_grid_box(const Vec& a_lo, const Vec& a_hi, int points_per_axis = 33);

// ---- Ito residual ----

struct ItoReport {
    double residual = 0.0;
    double stderr = 0.0;   // replica bootstrap
    double c_f = 0.0;      // observed generator magnitude, scales the O(dt) term
    double f_start = 0.0;
    double f_end = 0.0;
};

/// Simulates the flow and computes
///   R = F(t, mu_t) - F(s, mu_s) - int_s^t [dF/dt + generator] du
/// with a left-endpoint sum on the grid and the empirical mean measure in
/// place of the deterministic flow (O(1/M) bias folded into the budget).
ItoReport ito_residual(const ModelSpec& model, const Policy& policy, const CylinderFunctional& F,
                       const InitSampler& init, const SimConfig& cfg, double s, double t,
                       int bootstrap_resamples = 100);

// ---- comparison-principle auxiliary function ----

/// theta(t, m) = e^{-L t} ( <sqrt(1+|x|^2), m> + m(R^d)^2 ).
struct AuxFunction {
    double L_coeff = 1.0;
    double operator()(double t, const AtomicMeasure& m) const;
};

/// Positive root of  n^2 + n (1 - c2 e^{L t}) - c1 e^{L t} = 0:
/// n . delta_0 lies in the sub-level set { theta <= c1 + c2 n } exactly for
/// n at or below this threshold.
double aux_exclusion_threshold(double t, double c1, double c2, double L_coeff);

struct AuxReport {
    std::size_t in_sublevel = 0;
    std::size_t violations = 0;
    double mass_cap = 0.0;
    bool holds = false;
};

/// For every sample in the sub-level set { theta(t,m) <= c1 + c2 m(R^d) },
/// verifies the quadratic mass cap implied by <sqrt(1+|x|^2), m> >= m(R^d)
/// and reports it, together with the tail-mass probe
/// m({|x| > R}) <= e^{L T} (c1 + c2 cap) / R.
AuxReport aux_sublevel_check(const std::vector<std::pair<double, AtomicMeasure>>& samples,
                             double c1, double c2, double L_coeff, double T_horizon,
                             double tail_radius = 10.0);

}  // namespace bmv

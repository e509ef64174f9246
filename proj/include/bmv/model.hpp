#pragma once

#include <functional>
#include <string>
#include <vector>

#include "bmv/measure.hpp"

namespace bmv {

/// Row-major d x d matrix.
using Mat = std::vector<double>;

/// Interaction measure as seen by the coefficients: summary statistics of
/// the frozen per-step mean measure, plus the measure itself for models
/// that need more than mass and first moments.
struct MeasureContext {
    double mass = 0.0;
    Vec first_moment;       // <m, x_i> per coordinate
    double second_moment = 0.0;
    const AtomicMeasure* measure = nullptr;

    static MeasureContext from(const AtomicMeasure& m);
};

/// Coefficient bundle (b, sigma, gamma, (p_l)) of the controlled branching
/// diffusion, with declared bounds. gamma must stay in [0, gamma_bar] and
/// the offspring pmf must respect the declared M1/M2 moment bounds; both
/// are asserted at every evaluation.
struct ModelSpec {
    int dim = 1;
    int action_dim = 1;

    std::function<Vec(double, const Vec&, const MeasureContext&, const Vec&)> drift;
    std::function<Mat(double, const Vec&, const MeasureContext&, const Vec&)> sigma;
    std::function<double(double, const Vec&, const MeasureContext&, const Vec&)> gamma;
    /// pmf (p_0, ..., p_L), finite support, L <= 64.
    std::function<std::vector<double>(double, const Vec&, const MeasureContext&, const Vec&)>
        offspring;

    double gamma_bar = 1.0;
    double M1 = 1.0;  // bound on sum l p_l
    double M2 = 1.0;  // bound on sum l^2 p_l

    /// Declared Lipschitz constants (metadata, used by diagnostic checks).
    struct Lipschitz {
        double b = 0.0, sigma = 0.0, gamma = 0.0, offspring = 0.0;
    } lipschitz;

    bool bounded_coefficients = true;  // which assumption family the model satisfies

    double eval_gamma(double t, const Vec& x, const MeasureContext& m, const Vec& a) const;
    std::vector<double> eval_offspring(double t, const Vec& x, const MeasureContext& m,
                                       const Vec& a) const;

    /// gamma * sum_l (l-1) p_l, the branching multiplier of the generator.
    double branching_rate(double t, const Vec& x, const MeasureContext& m, const Vec& a) const;
};

constexpr std::size_t kMaxOffspring = 64;

// Built-in coefficient families for the CLI registry. Keys follow the
// model-file format: family names with per-family parameters.
//
//   drift:  zero | constant c | affine k c (k*x + c) | action (b = a)
//           | mass_coupled k c q (k*x + c + q*mass)
//   sigma:  zero | constant s
//   gamma:  zero | constant g
//   offspring: death | identity | binary | pmf p0 p1 ...
ModelSpec make_model(const std::string& drift_spec, const std::string& sigma_spec,
                     const std::string& gamma_spec, const std::string& offspring_spec,
                     int dim = 1, double gamma_bar = 1.0);

}  // namespace bmv

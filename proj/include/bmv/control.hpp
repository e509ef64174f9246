#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "bmv/model.hpp"
#include "bmv/policy.hpp"
#include "bmv/simulate.hpp"

namespace bmv {

/// Running and terminal cost with declared bounds; |L| <= C_L and
/// |g| <= C_g are asserted at every evaluation.
struct CostSpec {
    std::function<double(double, const Vec&, const MeasureContext&, const Vec&)> running;
    std::function<double(const Vec&, const MeasureContext&)> terminal;
    double C_L = 1e6;
    double C_g = 1e6;

    double eval_running(double t, const Vec& x, const MeasureContext& m, const Vec& a) const;
    double eval_terminal(const Vec& x, const MeasureContext& m) const;

    /// L = |a|^2, g = |x|^2 (the linear-quadratic toy costs).
    static CostSpec lq(double c_l = 1e6, double c_g = 1e6);
};

struct CostEstimate {
    double estimate = 0.0;
    double stderr = 0.0;  // replica bootstrap
    double running_part = 0.0;
    double terminal_part = 0.0;
};

/// Monte Carlo cost of a fixed policy:
///   sum_u dt <L(u, ., mu_hat_u, alpha(u,.)), mu_hat_u>  (left endpoints)
///   + <g(., mu_hat_T), mu_hat_T>,
/// streamed per replica so the bootstrap standard error needs only the
/// per-replica contributions.
CostEstimate evaluate_cost(const ModelSpec& model, const Policy& policy, const CostSpec& cost,
                           const InitSampler& init, const SimConfig& cfg,
                           int bootstrap_resamples = 200);

// ---- derivative-free minimization ----

struct OptimBudget {
    int restarts = 3;
    int max_iters = 80;
    double xtol = 1e-6;
    double initial_step = 0.5;
};

struct NelderMeadResult {
    std::vector<double> x;
    double value = 0.0;
    double simplex_diameter = 0.0;  // optimizer-error certificate
    std::size_t evals = 0;
    bool converged = false;
};

NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                             const std::vector<double>& start, double initial_step, int max_iters,
                             double xtol);

// ---- value function approximation ----

struct ValueResult {
    double value = 0.0;
    double stderr = 0.0;
    Policy best_policy;
    bool converged = false;
    double simplex_diameter = 0.0;
    std::vector<double> restart_values;  // best value per restart, in order
};

/// v(t, nu) approximated by minimizing the Monte Carlo cost over the
/// parameter vector of `prototype`'s family. All evaluations reuse one
/// seed (common random numbers), so the objective is deterministic and
/// the restarts probe distinct start simplices. At t == T no simulation
/// runs: the value is <g(., nu), nu> exactly.
ValueResult approximate_value(const ModelSpec& model, const CostSpec& cost,
                              const AtomicMeasure& nu, double t, double T_horizon,
                              const Policy& prototype, const SimConfig& sim_template,
                              const OptimBudget& budget);

// ---- dynamic programming consistency ----

struct DppReport {
    double lhs = 0.0;           // v(t, nu)
    double rhs = 0.0;           // inf_a [ running cost on [t,s] + v(s, mu_s^a) ]
    double gap = 0.0;           // lhs - rhs
    double eps_mc = 0.0;        // combined Monte Carlo stderr
    double eps_opt = 0.0;       // combined simplex diameters
    bool holds = false;         // |gap| within tolerance + eps_mc
    double tolerance = 5e-3;
};

/// Splits [t, T] at s: the left side is one value optimization over
/// [t, T]; the right side optimizes the stage policy on [t, s] where the
/// continuation is the re-optimized value at the reached mean measure.
/// Shared seeds make the initial-population noise cancel in the gap.
DppReport check_dpp(const ModelSpec& model, const CostSpec& cost, const AtomicMeasure& nu,
                    double t, double s, double T_horizon, const Policy& prototype,
                    const SimConfig& sim_template, const OptimBudget& budget,
                    double tolerance = 5e-3);

}  // namespace bmv

#pragma once

#include <cstdint>
#include <set>
#include <vector>

#include "bmv/simulate.hpp"

namespace bmv {

/// Mean and standard error of a sample.
struct MeanStderr {
    double mean = 0.0;
    double stderr = 0.0;
};

MeanStderr mean_stderr(const std::vector<double>& samples);

/// Per-replica particle counts at every grid time, plus running suprema.
class CountTracker : public StepObserver {
  public:
    void on_state(std::size_t step, double time, const std::vector<Configuration>& replicas,
                  const AtomicMeasure& mu_hat) override;

    const std::vector<double>& times() const { return times_; }
    /// counts[step][replica]
    const std::vector<std::vector<std::uint32_t>>& counts() const { return counts_; }
    const std::vector<std::uint32_t>& sup_counts() const { return sup_; }

    MeanStderr mass_at_step(std::size_t step) const;
    std::size_t step_of(double s) const;

  private:
    std::vector<double> times_;
    std::vector<std::vector<std::uint32_t>> counts_;
    std::vector<std::uint32_t> sup_;
};

/// Per-replica running sup of sum_k |X^k|.
class PositionSumTracker : public StepObserver {
  public:
    void on_state(std::size_t step, double time, const std::vector<Configuration>& replicas,
                  const AtomicMeasure& mu_hat) override;
    const std::vector<double>& sup_position_sums() const { return sup_; }

  private:
    std::vector<double> sup_;
};

/// Stores per-replica configurations (and the empirical mean measure) at a
/// requested set of step indices only.
class SnapshotRecorder : public StepObserver {
  public:
    explicit SnapshotRecorder(std::set<std::size_t> steps) : wanted_(std::move(steps)) {}
    void on_state(std::size_t step, double time, const std::vector<Configuration>& replicas,
                  const AtomicMeasure& mu_hat) override;

    bool has(std::size_t step) const { return states_.count(step) != 0; }
    const std::vector<Configuration>& states(std::size_t step) const { return states_.at(step); }
    const AtomicMeasure& mean_measure(std::size_t step) const { return means_.at(step); }

  private:
    std::set<std::size_t> wanted_;
    std::map<std::size_t, std::vector<Configuration>> states_;
    std::map<std::size_t, AtomicMeasure> means_;
};

// ---- a priori estimate checks ----

struct MomentReport {
    double estimate = 0.0;
    double stderr = 0.0;
    double bound = 0.0;
    bool holds = false;
};

/// E[sup_s #K_s] against E[<xi,1>] e^{gamma_bar M1 (T-t)}.
MomentReport check_first_moment_bound(const CountTracker& tracker, const ModelSpec& model,
                                      double horizon);

/// E[sup_s (#K_s)^2] against
/// 3 (E<xi,1>^2 + (T-t) gamma_bar M2 e^{gamma_bar M1 (T-t)} E<xi,1>)
///   e^{3 (T-t)^2 gamma_bar^2 M1^2}.
MomentReport check_second_moment_bound(const CountTracker& tracker, const ModelSpec& model,
                                       double horizon);

/// E[sup_s sum_k |X^k_s|]: estimate with stderr; holds iff finite.
MomentReport check_position_sum_bound(const PositionSumTracker& tracker);

// ---- time continuity ----

struct TimeContinuityReport {
    std::vector<double> lags;        // h values
    std::vector<double> distances;   // E d_E(Z_{r+h}, Z_r)
    double fitted_exponent = 0.0;    // slope of log E d_E vs log h
    double envelope_constant = 0.0;  // max_h E d_E / sqrt(h)
};

/// Runs the model and measures E d_E(Z_{r+h}, Z_r) over dyadic lags h,
/// fitting the scaling exponent. Sub-sqrt(h) behavior gives exponent <= 0.6.
TimeContinuityReport check_time_continuity(const ModelSpec& model, const Policy& policy,
                                           const InitSampler& init, const SimConfig& cfg,
                                           double base_time, const std::vector<double>& lags);

// ---- coupled stability ----

struct StabilityPoint {
    double epsilon = 0.0;
    double d_e_initial = 0.0;   // E d_E(xi, xi')
    double d_e_terminal = 0.0;  // E d_E(Z_T, Z'_T)
    double d_e_ratio = 0.0;
    double w1_initial = 0.0;  // W1bar of initial mean measures
    double w1_terminal = 0.0;
    double w1_ratio = 0.0;
};

struct StabilityReport {
    std::vector<StabilityPoint> points;
    double max_d_e_ratio = 0.0;
    double min_d_e_ratio = 0.0;
    double max_w1_ratio = 0.0;
    double min_w1_ratio = 0.0;
};

/// Perturbation sweep: for each epsilon runs the base process and a copy
/// whose initial particles are shifted by epsilon (same labels, same seed,
/// hence shared noise streams) and reports terminal/initial distance
/// ratios. The coupling lives in the label-keyed streams; uncoupled
/// comparisons are not expressible through this interface.
StabilityReport check_path_stability(const ModelSpec& model, const Policy& policy,
                                     const InitSampler& base_init, const SimConfig& cfg,
                                     const std::vector<double>& epsilons);

}  // namespace bmv

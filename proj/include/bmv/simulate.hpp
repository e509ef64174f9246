#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "bmv/configuration.hpp"
#include "bmv/model.hpp"
#include "bmv/policy.hpp"
#include "bmv/rng.hpp"

namespace bmv {

struct SimConfig {
    double t0 = 0.0;
    double T = 1.0;
    double dt = 1e-2;
    std::size_t replicas = 1;
    std::uint64_t seed = 0;

    enum class Interaction { mean_field, frozen };
    Interaction interaction = Interaction::mean_field;
    /// Used when interaction == frozen: a single measure (constant-in-time)
    /// or one measure per grid time.
    std::vector<AtomicMeasure> frozen_flow;

    std::size_t steps() const;
    double time_at(std::size_t step) const { return t0 + static_cast<double>(step) * dt; }
    void validate(double gamma_bar) const;
};

/// Samples the initial configuration of one replica from the init channel.
using InitSampler = std::function<Configuration(RngStream&)>;

/// Canonical Poissonized sampler for an initial law nu: particle count is
/// Poisson(mass), positions i.i.d. from the normalized atoms, labels 1..N.
InitSampler poissonized_sampler(const AtomicMeasure& nu);
/// Deterministic sampler: one particle per atom (unit weights expected),
/// labels 1..n in atom order.
InitSampler fixed_sampler(const AtomicMeasure& nu);

/// Streaming hook into the barrier-synchronized step loop. on_state fires
/// at every grid time (including t0 and T) after the cross-replica mean
/// measure has been rebuilt; on_event fires per accepted branching event.
class StepObserver {
  public:
    virtual ~StepObserver() = default;
    virtual void on_state(std::size_t step, double time,
                          const std::vector<Configuration>& replicas,
                          const AtomicMeasure& mu_hat) = 0;
    virtual void on_event(std::size_t /*step*/, double /*time*/, std::size_t /*replica*/,
                          const Label& /*parent*/, std::uint32_t /*offspring*/) {}
};

/// Runs the Euler-Maruyama / thinning scheme for the controlled branching
/// diffusion. Deterministic given (model, policy, init, cfg): every draw
/// comes from a counter-based stream keyed by (replica, label, channel,
/// step), so two runs with the same seed are coupled label-by-label.
void simulate(const ModelSpec& model, const Policy& policy, const InitSampler& init,
              const SimConfig& cfg, const std::vector<StepObserver*>& observers);

// ---- convenience recorder (small runs, CLI output) ----

struct BranchEvent {
    std::size_t step = 0;
    double time = 0.0;
    std::size_t replica = 0;
    Label parent;
    std::uint32_t offspring = 0;
};

struct PopulationPath {
    std::vector<double> times;
    std::vector<std::vector<Configuration>> states;  // [time][replica]
    std::vector<AtomicMeasure> mean_flow;            // empirical mu_hat per time
    std::vector<BranchEvent> events;

    std::size_t index_of(double s) const;  // throws on off-grid s
    const AtomicMeasure& mean_measure(double s) const { return mean_flow.at(index_of(s)); }
};

class PathRecorder : public StepObserver {
  public:
    void on_state(std::size_t step, double time, const std::vector<Configuration>& replicas,
                  const AtomicMeasure& mu_hat) override;
    void on_event(std::size_t step, double time, std::size_t replica, const Label& parent,
                  std::uint32_t offspring) override;
    const PopulationPath& path() const { return path_; }
    PopulationPath take() { return std::move(path_); }

  private:
    PopulationPath path_;
};

PopulationPath simulate_recorded(const ModelSpec& model, const Policy& policy,
                                 const InitSampler& init, const SimConfig& cfg);

}  // namespace bmv

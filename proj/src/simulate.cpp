#include "bmv/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace bmv {

std::size_t SimConfig::steps() const {
    return static_cast<std::size_t>(std::llround((T - t0) / dt));
}

void SimConfig::validate(double gamma_bar) const {
    if (!(dt > 0.0)) throw std::invalid_argument("SimConfig: dt must be positive");
    if (!(t0 <= T)) throw std::invalid_argument("SimConfig: t0 must not exceed T");
    if (dt * gamma_bar >= 1.0)
        throw std::invalid_argument("SimConfig: dt * gamma_bar must be below 1 (thinning validity)");
    if (replicas == 0) throw std::invalid_argument("SimConfig: need at least one replica");
    if (interaction == Interaction::frozen && frozen_flow.empty())
        throw std::invalid_argument("SimConfig: frozen interaction needs a measure");
}

InitSampler poissonized_sampler(const AtomicMeasure& nu) {
    AtomicMeasure clean = nu.normalized();
    double mass = clean.total_mass();
    // cumulative weights for position sampling
    std::vector<double> cum;
    cum.reserve(clean.size());
    double acc = 0.0;
    for (const auto& a : clean.atoms()) {
        acc += a.weight;
        cum.push_back(acc);
    }
    return [clean, mass, cum](RngStream& rng) {
        Configuration e(clean.dim());
        if (mass <= 0.0) return e;
        // Poisson(mass) by inversion; mass is desk-scale here
        double u = rng.u01();
        double p = std::exp(-mass);
        double c = p;
        std::uint32_t n = 0;
        while (u > c && n < 100000) {
            ++n;
            p *= mass / static_cast<double>(n);
            c += p;
        }
        for (std::uint32_t i = 1; i <= n; ++i) {
            double v = rng.u01() * mass;
            std::size_t idx = std::lower_bound(cum.begin(), cum.end(), v) - cum.begin();
            if (idx >= clean.size()) idx = clean.size() - 1;
            e.insert(Label({i}), clean.atoms()[idx].position);
        }
        return e;
    };
}

InitSampler fixed_sampler(const AtomicMeasure& nu) {
    AtomicMeasure clean = nu.normalized();
    return [clean](RngStream&) {
        Configuration e(clean.dim());
        std::uint32_t i = 1;
        for (const auto& a : clean.atoms()) e.insert(Label({i++}), a.position);
        return e;
    };
}

namespace {

AtomicMeasure empirical_mean(const std::vector<Configuration>& replicas, int dim) {
    AtomicMeasure mu(dim);
    double w = 1.0 / static_cast<double>(replicas.size());
    for (const auto& e : replicas)
        for (const auto& [k, x] : e.particles()) mu.add_atom(x, w);
    return mu;
}

}  // namespace

void simulate(const ModelSpec& model, const Policy& policy, const InitSampler& init,
              const SimConfig& cfg, const std::vector<StepObserver*>& observers) {
    cfg.validate(model.gamma_bar);
    const int d = model.dim;
    const std::size_t steps = cfg.steps();
    const std::size_t M = cfg.replicas;

    std::vector<Configuration> replicas;
    replicas.reserve(M);
    for (std::size_t r = 0; r < M; ++r) {
        RngStream rng(cfg.seed, r, 0, Channel::init, 0);
        Configuration e = init(rng);
        if (e.dim() != d) throw std::invalid_argument("simulate: init dimension mismatch");
        replicas.push_back(std::move(e));
    }

    const double candidate_prob = model.gamma_bar * cfg.dt;

    for (std::size_t step = 0;; ++step) {
        const double t = cfg.time_at(step);
        // streams are keyed by the absolute grid index t/dt, not the local
        // step counter, so a run restarted mid-horizon replays the same
        // noise (flow property)
        const auto step_key = static_cast<std::uint64_t>(std::llround(t / cfg.dt));
        AtomicMeasure mu_hat = empirical_mean(replicas, d);
        const AtomicMeasure* interaction = &mu_hat;
        if (cfg.interaction == SimConfig::Interaction::frozen) {
            const auto& flow = cfg.frozen_flow;
            interaction = &flow[std::min(step, flow.size() - 1)];
        }
        MeasureContext ctx = MeasureContext::from(*interaction);

        for (auto* obs : observers) obs->on_state(step, t, replicas, mu_hat);
        if (step == steps) break;

        // barrier-synchronized step: the interaction context is frozen for
        // the whole sweep; replica work is independent given its streams
        for (std::size_t r = 0; r < M; ++r) {
            auto& e = replicas[r];
            // snapshot of alive labels; branching mutates the key set
            std::vector<Label> alive;
            alive.reserve(e.size());
            for (const auto& [k, x] : e.particles()) alive.push_back(k);

            for (const auto& k : alive) {
                const Vec x = e.position(k);
                const Vec a = policy.evaluate(t, x);

                // Euler-Maruyama move
                Vec b = model.drift(t, x, ctx, a);
                Mat s = model.sigma(t, x, ctx, a);
                RngStream motion(cfg.seed, r, k.stable_hash(), Channel::motion, step_key);
                Vec z(d);
                for (int i = 0; i < d; ++i) z[i] = motion.normal();
                Vec xnew(d);
                const double sqdt = std::sqrt(cfg.dt);
                for (int i = 0; i < d; ++i) {
                    double diff = 0.0;
                    for (int j = 0; j < d; ++j) diff += s[static_cast<std::size_t>(i) * d + j] * z[j];
                    xnew[i] = x[i] + b[i] * cfg.dt + diff * sqdt;
                    if (!std::isfinite(xnew[i]))
                        throw std::runtime_error("simulate: non-finite position (replica " +
                                                 std::to_string(r) + ", particle " + k.to_string() +
                                                 ", step " + std::to_string(step) + ")");
                }
                e.position(k) = xnew;

                // thinned branching: candidate at rate gamma_bar, accept
                // with probability gamma/gamma_bar (z1 in [0, gamma])
                RngStream event(cfg.seed, r, k.stable_hash(), Channel::event, step_key);
                if (event.u01() < candidate_prob) {
                    double z1 = event.u01() * model.gamma_bar;
                    double g = model.eval_gamma(t, x, ctx, a);
                    if (z1 <= g) {
                        RngStream offspring(cfg.seed, r, k.stable_hash(), Channel::offspring, step_key);
                        double z2 = offspring.u01();
                        auto pmf = model.eval_offspring(t, x, ctx, a);
                        double c = 0.0;
                        std::uint32_t l = 0;
                        for (std::size_t i = 0; i < pmf.size(); ++i) {
                            c += pmf[i];
                            if (z2 < c) {
                                l = static_cast<std::uint32_t>(i);
                                break;
                            }
                            l = static_cast<std::uint32_t>(i);
                        }
                        e.branch(k, l, xnew);
                        for (auto* obs : observers) obs->on_event(step, t, r, k, l);
                    }
                }
            }
        }
    }
}

std::size_t PopulationPath::index_of(double s) const {
    if (times.empty()) throw std::runtime_error("PopulationPath: empty path");
    double dt = times.size() > 1 ? times[1] - times[0] : 1.0;
    double rel = (s - times.front()) / dt;
    auto idx = static_cast<std::ptrdiff_t>(std::llround(rel));
    if (idx < 0 || idx >= static_cast<std::ptrdiff_t>(times.size()) ||
        std::abs(times[static_cast<std::size_t>(idx)] - s) > 1e-9 * (1.0 + std::abs(s)))
        throw std::invalid_argument("PopulationPath: time off grid");
    return static_cast<std::size_t>(idx);
}

void PathRecorder::on_state(std::size_t, double time, const std::vector<Configuration>& replicas,
                            const AtomicMeasure& mu_hat) {
    path_.times.push_back(time);
    path_.states.push_back(replicas);
    path_.mean_flow.push_back(mu_hat);
}

void PathRecorder::on_event(std::size_t step, double time, std::size_t replica, const Label& parent,
                            std::uint32_t offspring) {
    path_.events.push_back({step, time, replica, parent, offspring});
}

PopulationPath simulate_recorded(const ModelSpec& model, const Policy& policy,
                                 const InitSampler& init, const SimConfig& cfg) {
    PathRecorder rec;
    std::vector<StepObserver*> obs{&rec};
    simulate(model, policy, init, cfg, obs);
    return rec.take();
}

}  // namespace bmv

#include "bmv/control.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bmv {

double CostSpec::eval_running(double t, const Vec& x, const MeasureContext& m,
                              const Vec& a) const {
    double v = running(t, x, m, a);
    if (std::abs(v) > C_L) throw std::runtime_error("CostSpec: running cost exceeds declared C_L");
    return v;
}

double CostSpec::eval_terminal(const Vec& x, const MeasureContext& m) const {
    double v = terminal(x, m);
    if (std::abs(v) > C_g) throw std::runtime_error("CostSpec: terminal cost exceeds declared C_g");
    return v;
}

CostSpec CostSpec::lq(double c_l, double c_g) {
    CostSpec c;
    c.running = [](double, const Vec&, const MeasureContext&, const Vec& a) {
        double s = 0.0;
        for (double ai : a) s += ai * ai;
        return s;
    };
    c.terminal = [](const Vec& x, const MeasureContext&) {
        double s = 0.0;
        for (double xi : x) s += xi * xi;
        return s;
    };
    c.C_L = c_l;
    c.C_g = c_g;
    return c;
}

namespace {

/// Left-endpoint running cost plus terminal cost, kept per replica so the
/// bootstrap works on M scalars. Optionally exposes the terminal mean
/// measure for staged evaluations.
class CostAccumulator : public StepObserver {
  public:
    CostAccumulator(const CostSpec& cost, const Policy& policy, double dt, std::size_t last_step,
                    bool include_terminal)
        : cost_(cost),
          policy_(policy),
          dt_(dt),
          last_(last_step),
          include_terminal_(include_terminal) {}

    void on_state(std::size_t step, double time, const std::vector<Configuration>& replicas,
                  const AtomicMeasure& mu_hat) override {
        if (totals_.empty()) totals_.assign(replicas.size(), 0.0);
        MeasureContext ctx = MeasureContext::from(mu_hat);
        if (step < last_) {
            for (std::size_t r = 0; r < replicas.size(); ++r) {
                double c = 0.0;
                for (const auto& [k, x] : replicas[r].particles())
                    c += cost_.eval_running(time, x, ctx, policy_.evaluate(time, x));
                totals_[r] += dt_ * c;
                running_sum_ += dt_ * c;
            }
        } else if (step == last_) {
            if (include_terminal_) {
                for (std::size_t r = 0; r < replicas.size(); ++r) {
                    double c = 0.0;
                    for (const auto& [k, x] : replicas[r].particles())
                        c += cost_.eval_terminal(x, ctx);
                    totals_[r] += c;
                    terminal_sum_ += c;
                }
            }
            terminal_mean_ = mu_hat;
        }
    }

    const std::vector<double>& totals() const { return totals_; }
    double running_mean() const { return running_sum_ / static_cast<double>(totals_.size()); }
    double terminal_mean_cost() const {
        return terminal_sum_ / static_cast<double>(totals_.size());
    }
    const AtomicMeasure& terminal_mean_measure() const { return terminal_mean_; }

  private:
    const CostSpec& cost_;
    const Policy& policy_;
    double dt_;
    std::size_t last_;
    bool include_terminal_;
    std::vector<double> totals_;
    double running_sum_ = 0.0;
    double terminal_sum_ = 0.0;
    AtomicMeasure terminal_mean_{1};
};

double bootstrap_stderr(const std::vector<double>& totals, std::uint64_t seed, int resamples) {
    const std::size_t M = totals.size();
    if (resamples < 2 || M < 2) return 0.0;
    std::vector<double> means;
    means.reserve(resamples);
    for (int b = 0; b < resamples; ++b) {
        RngStream rng(seed ^ 0x626f6f74ULL, static_cast<std::uint64_t>(b), 0, Channel::event, 0);
        double s = 0.0;
        for (std::size_t r = 0; r < M; ++r) {
            auto idx = std::min<std::size_t>(static_cast<std::size_t>(rng.u01() * M), M - 1);
            s += totals[idx];
        }
        means.push_back(s / static_cast<double>(M));
    }
    double mean = 0.0;
    for (double v : means) mean += v;
    mean /= static_cast<double>(means.size());
    double ss = 0.0;
    for (double v : means) ss += (v - mean) * (v - mean);
    return std::sqrt(ss / (static_cast<double>(means.size()) - 1.0));
}

}  // namespace

CostEstimate evaluate_cost(const ModelSpec& model, const Policy& policy, const CostSpec& cost,
                           const InitSampler& init, const SimConfig& cfg,
                           int bootstrap_resamples) {
    CostAccumulator acc(cost, policy, cfg.dt, cfg.steps(), true);
    std::vector<StepObserver*> obs{&acc};
    simulate(model, policy, init, cfg, obs);

    CostEstimate est;
    est.running_part = acc.running_mean();
    est.terminal_part = acc.terminal_mean_cost();
    est.estimate = est.running_part + est.terminal_part;
    est.stderr = bootstrap_stderr(acc.totals(), cfg.seed, bootstrap_resamples);
    return est;
}

NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                             const std::vector<double>& start, double initial_step, int max_iters,
                             double xtol) {
    const std::size_t n = start.size();
    if (n == 0) throw std::invalid_argument("nelder_mead: empty start point");

    std::vector<std::vector<double>> simplex(n + 1, start);
    for (std::size_t i = 0; i < n; ++i) simplex[i + 1][i] += initial_step;
    std::vector<double> fv(n + 1);
    NelderMeadResult res;
    for (std::size_t i = 0; i <= n; ++i) {
        fv[i] = f(simplex[i]);
        ++res.evals;
    }

    auto diameter = [&] {
        double d = 0.0;
        for (std::size_t i = 1; i <= n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                d = std::max(d, std::abs(simplex[i][j] - simplex[0][j]));
        return d;
    };

    for (int iter = 0; iter < max_iters; ++iter) {
        // order best to worst
        std::vector<std::size_t> ord(n + 1);
        for (std::size_t i = 0; i <= n; ++i) ord[i] = i;
        std::sort(ord.begin(), ord.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
        {
            std::vector<std::vector<double>> s2;
            std::vector<double> f2;
            for (std::size_t i = 0; i <= n; ++i) {
                s2.push_back(simplex[ord[i]]);
                f2.push_back(fv[ord[i]]);
            }
            simplex = std::move(s2);
            fv = std::move(f2);
        }
        if (diameter() < xtol) {
            res.converged = true;
            break;
        }

        std::vector<double> centroid(n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) centroid[j] += simplex[i][j] / static_cast<double>(n);

        auto blend = [&](double coef) {
            std::vector<double> p(n);
            for (std::size_t j = 0; j < n; ++j)
                p[j] = centroid[j] + coef * (simplex[n][j] - centroid[j]);
            return p;
        };

        auto xr = blend(-1.0);
        double fr = f(xr);
        ++res.evals;
        if (fr < fv[0]) {
            auto xe = blend(-2.0);
            double fe = f(xe);
            ++res.evals;
            if (fe < fr) {
                simplex[n] = std::move(xe);
                fv[n] = fe;
            } else {
                simplex[n] = std::move(xr);
                fv[n] = fr;
            }
        } else if (fr < fv[n - 1]) {
            simplex[n] = std::move(xr);
            fv[n] = fr;
        } else {
            auto xc = blend(fr < fv[n] ? -0.5 : 0.5);
            double fc = f(xc);
            ++res.evals;
            if (fc < std::min(fr, fv[n])) {
                simplex[n] = std::move(xc);
                fv[n] = fc;
            } else {
                for (std::size_t i = 1; i <= n; ++i) {
                    for (std::size_t j = 0; j < n; ++j)
                        simplex[i][j] = simplex[0][j] + 0.5 * (simplex[i][j] - simplex[0][j]);
                    fv[i] = f(simplex[i]);
                    ++res.evals;
                }
            }
        }
    }

    std::size_t best = 0;
    for (std::size_t i = 1; i <= n; ++i)
        if (fv[i] < fv[best]) best = i;
    res.x = simplex[best];
    res.value = fv[best];
    res.simplex_diameter = diameter();
    return res;
}

ValueResult approximate_value(const ModelSpec& model, const CostSpec& cost,
                              const AtomicMeasure& nu, double t, double T_horizon,
                              const Policy& prototype, const SimConfig& sim_template,
                              const OptimBudget& budget) {
    ValueResult out;
    if (t > T_horizon + 1e-12)
        throw std::invalid_argument("approximate_value: t beyond the horizon");
    if (t >= T_horizon - 1e-12) {
        // no time left: the value is the terminal cost of nu itself
        MeasureContext ctx = MeasureContext::from(nu);
        double v = 0.0;
        for (const auto& a : nu.atoms()) v += a.weight * cost.eval_terminal(a.position, ctx);
        out.value = v;
        out.best_policy = prototype;
        out.converged = true;
        return out;
    }

    SimConfig cfg = sim_template;
    cfg.t0 = t;
    cfg.T = T_horizon;
    InitSampler init = poissonized_sampler(nu);

    auto objective = [&](const std::vector<double>& params) {
        return evaluate_cost(model, prototype.with_params(params), cost, init, cfg, 0).estimate;
    };

    const std::size_t n = prototype.param_count();
    bool have = false;
    for (int restart = 0; restart < std::max(1, budget.restarts); ++restart) {
        std::vector<double> start = prototype.params();
        if (restart > 0) {
            RngStream rng(cfg.seed, static_cast<std::uint64_t>(restart), 0, Channel::init, 1);
            for (std::size_t i = 0; i < n; ++i)
                start[i] += (2.0 * rng.u01() - 1.0) * 2.0 * budget.initial_step;
        }
        auto res = nelder_mead(objective, start, budget.initial_step, budget.max_iters, budget.xtol);
        out.restart_values.push_back(res.value);
        if (!have || res.value < out.value) {
            out.value = res.value;
            out.best_policy = prototype.with_params(res.x);
            out.converged = res.converged;
            out.simplex_diameter = res.simplex_diameter;
            have = true;
        }
    }

    auto final_est = evaluate_cost(model, out.best_policy, cost, init, cfg, 200);
    out.value = final_est.estimate;
    out.stderr = final_est.stderr;
    return out;
}

namespace {

struct StageResult {
    double running = 0.0;
    double stderr = 0.0;
    AtomicMeasure reached{1};
};

StageResult run_stage(const ModelSpec& model, const Policy& policy, const CostSpec& cost,
                      const InitSampler& init, const SimConfig& cfg, int bootstrap) {
    CostAccumulator acc(cost, policy, cfg.dt, cfg.steps(), false);
    std::vector<StepObserver*> obs{&acc};
    simulate(model, policy, init, cfg, obs);
    StageResult out;
    out.running = acc.running_mean();
    out.stderr = bootstrap_stderr(acc.totals(), cfg.seed, bootstrap);
    out.reached = acc.terminal_mean_measure();
    return out;
}

}  // namespace

DppReport check_dpp(const ModelSpec& model, const CostSpec& cost, const AtomicMeasure& nu,
                    double t, double s, double T_horizon, const Policy& prototype,
                    const SimConfig& sim_template, const OptimBudget& budget, double tolerance) {
    if (!(t < s && s < T_horizon)) throw std::invalid_argument("check_dpp: need t < s < T");

    auto lhs = approximate_value(model, cost, nu, t, T_horizon, prototype, sim_template, budget);

    SimConfig stage_cfg = sim_template;
    stage_cfg.t0 = t;
    stage_cfg.T = s;
    InitSampler init = poissonized_sampler(nu);

    OptimBudget inner_budget = budget;
    inner_budget.restarts = 1;

    auto rhs_objective = [&](const std::vector<double>& params) {
        Policy stage_policy = prototype.with_params(params);
        auto stage = run_stage(model, stage_policy, cost, init, stage_cfg, 0);
        auto inner = approximate_value(model, cost, stage.reached, s, T_horizon, prototype,
                                       sim_template, inner_budget);
        return stage.running + inner.value;
    };

    NelderMeadResult outer;
    bool have = false;
    for (int restart = 0; restart < std::max(1, budget.restarts); ++restart) {
        std::vector<double> start = prototype.params();
        if (restart > 0) {
            RngStream rng(sim_template.seed, static_cast<std::uint64_t>(restart), 1, Channel::init,
                          1);
            for (std::size_t i = 0; i < start.size(); ++i)
                start[i] += (2.0 * rng.u01() - 1.0) * 2.0 * budget.initial_step;
        }
        auto res =
            nelder_mead(rhs_objective, start, budget.initial_step, budget.max_iters, budget.xtol);
        if (!have || res.value < outer.value) {
            outer = res;
            have = true;
        }
    }

    // re-evaluate the optimum with error bars
    Policy stage_policy = prototype.with_params(outer.x);
    auto stage = run_stage(model, stage_policy, cost, init, stage_cfg, 200);
    auto inner = approximate_value(model, cost, stage.reached, s, T_horizon, prototype,
                                   sim_template, inner_budget);

    DppReport rep;
    rep.lhs = lhs.value;
    rep.rhs = stage.running + inner.value;
    rep.gap = rep.lhs - rep.rhs;
    rep.eps_mc = lhs.stderr + stage.stderr + inner.stderr;
    rep.eps_opt = lhs.simplex_diameter + outer.simplex_diameter + inner.simplex_diameter;
    rep.tolerance = tolerance;
    rep.holds = std::abs(rep.gap) <= tolerance + 3.0 * rep.eps_mc;
    return rep;
}

}  // namespace bmv

#include "bmv/diagnostics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "bmv/transport.hpp"

namespace bmv {

MeanStderr mean_stderr(const std::vector<double>& samples) {
    MeanStderr out;
    const auto n = static_cast<double>(samples.size());
    if (samples.empty()) return out;
    double sum = 0.0;
    for (double v : samples) sum += v;
    out.mean = sum / n;
    if (samples.size() < 2) return out;
    double ss = 0.0;
    for (double v : samples) {
        double d = v - out.mean;
        ss += d * d;
    }
    out.stderr = std::sqrt(ss / (n - 1.0) / n);
    return out;
}

void CountTracker::on_state(std::size_t, double time, const std::vector<Configuration>& replicas,
                            const AtomicMeasure&) {
    times_.push_back(time);
    std::vector<std::uint32_t> row(replicas.size());
    if (sup_.empty()) sup_.assign(replicas.size(), 0);
    for (std::size_t r = 0; r < replicas.size(); ++r) {
        row[r] = static_cast<std::uint32_t>(replicas[r].size());
        sup_[r] = std::max(sup_[r], row[r]);
    }
    counts_.push_back(std::move(row));
}

MeanStderr CountTracker::mass_at_step(std::size_t step) const {
    const auto& row = counts_.at(step);
    std::vector<double> v(row.begin(), row.end());
    return mean_stderr(v);
}

std::size_t CountTracker::step_of(double s) const {
    if (times_.size() < 2) throw std::runtime_error("CountTracker: no grid");
    double dt = times_[1] - times_[0];
    auto idx = static_cast<std::size_t>(std::llround((s - times_.front()) / dt));
    if (idx >= times_.size() || std::abs(times_[idx] - s) > 1e-9 * (1.0 + std::abs(s)))
        throw std::invalid_argument("CountTracker: time off grid");
    return idx;
}

void PositionSumTracker::on_state(std::size_t, double, const std::vector<Configuration>& replicas,
                                  const AtomicMeasure&) {
    if (sup_.empty()) sup_.assign(replicas.size(), 0.0);
    for (std::size_t r = 0; r < replicas.size(); ++r) {
        double s = 0.0;
        for (const auto& [k, x] : replicas[r].particles()) s += euclidean_norm(x);
        sup_[r] = std::max(sup_[r], s);
    }
}

void SnapshotRecorder::on_state(std::size_t step, double, const std::vector<Configuration>& replicas,
                                const AtomicMeasure& mu_hat) {
    if (!wanted_.count(step)) return;
    states_.emplace(step, replicas);
    means_.emplace(step, mu_hat);
}

MomentReport check_first_moment_bound(const CountTracker& tracker, const ModelSpec& model,
                                      double horizon) {
    MomentReport rep;
    std::vector<double> sup(tracker.sup_counts().begin(), tracker.sup_counts().end());
    auto ms = mean_stderr(sup);
    rep.estimate = ms.mean;
    rep.stderr = ms.stderr;
    double initial_mass = tracker.mass_at_step(0).mean;
    rep.bound = initial_mass * std::exp(model.gamma_bar * model.M1 * horizon);
    rep.holds = rep.estimate - 3.0 * rep.stderr <= rep.bound;
    return rep;
}

MomentReport check_second_moment_bound(const CountTracker& tracker, const ModelSpec& model,
                                       double horizon) {
    MomentReport rep;
    std::vector<double> sup_sq;
    sup_sq.reserve(tracker.sup_counts().size());
    for (auto c : tracker.sup_counts()) sup_sq.push_back(static_cast<double>(c) * c);
    auto ms = mean_stderr(sup_sq);
    rep.estimate = ms.mean;
    rep.stderr = ms.stderr;

    double e_mass = 0.0, e_mass_sq = 0.0;
    for (auto c : tracker.counts().at(0)) {
        e_mass += c;
        e_mass_sq += static_cast<double>(c) * c;
    }
    e_mass /= static_cast<double>(tracker.counts()[0].size());
    e_mass_sq /= static_cast<double>(tracker.counts()[0].size());

    double growth = std::exp(model.gamma_bar * model.M1 * horizon);
    rep.bound = 3.0 * (e_mass_sq + horizon * model.gamma_bar * model.M2 * growth * e_mass) *
                std::exp(3.0 * horizon * horizon * model.gamma_bar * model.gamma_bar * model.M1 *
                         model.M1);
    rep.holds = rep.estimate - 3.0 * rep.stderr <= rep.bound;
    return rep;
}

MomentReport check_position_sum_bound(const PositionSumTracker& tracker) {
    MomentReport rep;
    auto ms = mean_stderr(tracker.sup_position_sums());
    rep.estimate = ms.mean;
    rep.stderr = ms.stderr;
    rep.bound = std::numeric_limits<double>::infinity();
    rep.holds = std::isfinite(rep.estimate);
    return rep;
}

TimeContinuityReport check_time_continuity(const ModelSpec& model, const Policy& policy,
                                           const InitSampler& init, const SimConfig& cfg,
                                           double base_time, const std::vector<double>& lags) {
    auto base_step = static_cast<std::size_t>(std::llround((base_time - cfg.t0) / cfg.dt));
    std::set<std::size_t> wanted{base_step};
    std::vector<std::size_t> lag_steps;
    for (double h : lags) {
        auto hs = static_cast<std::size_t>(std::llround(h / cfg.dt));
        if (hs == 0) throw std::invalid_argument("check_time_continuity: lag below dt");
        lag_steps.push_back(base_step + hs);
        wanted.insert(base_step + hs);
    }
    if (*wanted.rbegin() > cfg.steps())
        throw std::invalid_argument("check_time_continuity: lag beyond horizon");

    SnapshotRecorder rec(wanted);
    std::vector<StepObserver*> obs{&rec};
    simulate(model, policy, init, cfg, obs);

    TimeContinuityReport rep;
    rep.lags = lags;
    const auto& base = rec.states(base_step);
    for (std::size_t i = 0; i < lags.size(); ++i) {
        const auto& later = rec.states(lag_steps[i]);
        double total = 0.0;
        for (std::size_t r = 0; r < base.size(); ++r) total += d_E(base[r], later[r]);
        rep.distances.push_back(total / static_cast<double>(base.size()));
    }

    // least-squares slope of log distance against log lag
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < lags.size(); ++i) {
        if (rep.distances[i] <= 0.0) continue;
        double lx = std::log(lags[i]);
        double ly = std::log(rep.distances[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++n;
    }
    if (n >= 2) {
        double nn = static_cast<double>(n);
        rep.fitted_exponent = (nn * sxy - sx * sy) / (nn * sxx - sx * sx);
    }
    for (std::size_t i = 0; i < lags.size(); ++i)
        rep.envelope_constant =
            std::max(rep.envelope_constant, rep.distances[i] / std::sqrt(lags[i]));
    return rep;
}

StabilityReport check_path_stability(const ModelSpec& model, const Policy& policy,
                                     const InitSampler& base_init, const SimConfig& cfg,
                                     const std::vector<double>& epsilons) {
    StabilityReport rep;
    const std::size_t last = cfg.steps();
    for (double eps : epsilons) {
        InitSampler shifted = [&base_init, eps](RngStream& rng) {
            Configuration e = base_init(rng);
            Configuration out(e.dim());
            for (const auto& [k, x] : e.particles()) {
                Vec y = x;
                y[0] += eps;
                out.insert(k, y);
            }
            return out;
        };

        SnapshotRecorder rec_a({0, last}), rec_b({0, last});
        {
            std::vector<StepObserver*> obs{&rec_a};
            simulate(model, policy, base_init, cfg, obs);
        }
        {
            std::vector<StepObserver*> obs{&rec_b};
            simulate(model, policy, shifted, cfg, obs);
        }

        StabilityPoint pt;
        pt.epsilon = eps;
        const auto& a0 = rec_a.states(0);
        const auto& b0 = rec_b.states(0);
        const auto& aT = rec_a.states(last);
        const auto& bT = rec_b.states(last);
        double d0 = 0.0, dT = 0.0;
        for (std::size_t r = 0; r < a0.size(); ++r) {
            d0 += d_E(a0[r], b0[r]);
            dT += d_E(aT[r], bT[r]);
        }
        pt.d_e_initial = d0 / static_cast<double>(a0.size());
        pt.d_e_terminal = dT / static_cast<double>(a0.size());
        pt.d_e_ratio = pt.d_e_initial > 0.0 ? pt.d_e_terminal / pt.d_e_initial : 0.0;

        // the exact transport solve is cubic in atom count, so the
        // mean-measure comparison uses a fixed prefix of replicas
        const std::size_t w1_cap = std::min<std::size_t>(a0.size(), 128);
        auto prefix_mean = [w1_cap](const std::vector<Configuration>& reps) {
            AtomicMeasure mu(reps.front().dim());
            double w = 1.0 / static_cast<double>(w1_cap);
            for (std::size_t r = 0; r < w1_cap; ++r)
                for (const auto& [k, x] : reps[r].particles()) mu.add_atom(x, w);
            return mu;
        };
        pt.w1_initial = truncated_w1(prefix_mean(a0), prefix_mean(b0));
        pt.w1_terminal = truncated_w1(prefix_mean(aT), prefix_mean(bT));
        pt.w1_ratio = pt.w1_initial > 0.0 ? pt.w1_terminal / pt.w1_initial : 0.0;
        rep.points.push_back(pt);
    }

    rep.max_d_e_ratio = rep.points.front().d_e_ratio;
    rep.min_d_e_ratio = rep.points.front().d_e_ratio;
    rep.max_w1_ratio = rep.points.front().w1_ratio;
    rep.min_w1_ratio = rep.points.front().w1_ratio;
    for (const auto& pt : rep.points) {
        rep.max_d_e_ratio = std::max(rep.max_d_e_ratio, pt.d_e_ratio);
        rep.min_d_e_ratio = std::min(rep.min_d_e_ratio, pt.d_e_ratio);
        rep.max_w1_ratio = std::max(rep.max_w1_ratio, pt.w1_ratio);
        rep.min_w1_ratio = std::min(rep.min_w1_ratio, pt.w1_ratio);
    }
    return rep;
}

}  // namespace bmv

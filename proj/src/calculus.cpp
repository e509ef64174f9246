#include "bmv/calculus.hpp"

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

#include "bmv/control.hpp"

namespace bmv {

TestField field_const(double c, int dim) {
    TestField f;
    f.value = [c](const Vec&) { return c; };
    f.gradient = [dim](const Vec&) { return Vec(dim, 0.0); };
    f.hessian = [dim](const Vec&) { return Mat(static_cast<std::size_t>(dim) * dim, 0.0); };
    f.growth = std::abs(c);
    return f;
}

TestField field_coordinate(int dim, int axis) {
    TestField f;
    f.value = [axis](const Vec& x) { return x[axis]; };
    f.gradient = [dim, axis](const Vec&) {
        Vec g(dim, 0.0);
        g[axis] = 1.0;
        return g;
    };
    f.hessian = [dim](const Vec&) { return Mat(static_cast<std::size_t>(dim) * dim, 0.0); };
    f.growth = 1.0;
    return f;
}

TestField field_norm_sq(int dim) {
    TestField f;
    f.value = [](const Vec& x) {
        double s = 0.0;
        for (double xi : x) s += xi * xi;
        return s;
    };
    f.gradient = [](const Vec& x) {
        Vec g(x);
        for (double& gi : g) gi *= 2.0;
        return g;
    };
    f.hessian = [dim](const Vec&) {
        Mat h(static_cast<std::size_t>(dim) * dim, 0.0);
        for (int i = 0; i < dim; ++i) h[static_cast<std::size_t>(i) * dim + i] = 2.0;
        return h;
    };
    f.growth = 100.0;  // quadratic, not linear; keep a finite placeholder
    return f;
}

CylinderFunctional CylinderFunctional::linear(TestField phi) {
    Outer outer;
    outer.value = [](double, const std::vector<double>& y) { return y[0]; };
    outer.dt = [](double, const std::vector<double>&) { return 0.0; };
    outer.dy = [](double, const std::vector<double>&) { return std::vector<double>{1.0}; };
    return CylinderFunctional({std::move(phi)}, std::move(outer));
}

CylinderFunctional CylinderFunctional::mass_squared(int dim) {
    Outer outer;
    outer.value = [](double, const std::vector<double>& y) { return y[0] * y[0]; };
    outer.dt = [](double, const std::vector<double>&) { return 0.0; };
    outer.dy = [](double, const std::vector<double>& y) {
        return std::vector<double>{2.0 * y[0]};
    };
    return CylinderFunctional({field_const(1.0, dim)}, std::move(outer));
}

std::vector<double> CylinderFunctional::inner_integrals(const AtomicMeasure& m) const {
    std::vector<double> y(inner_.size(), 0.0);
    for (std::size_t i = 0; i < inner_.size(); ++i)
        for (const auto& a : m.atoms()) y[i] += a.weight * inner_[i].value(a.position);
    return y;
}

double CylinderFunctional::operator()(double t, const AtomicMeasure& m) const {
    return outer_.value(t, inner_integrals(m));
}

double CylinderFunctional::time_derivative(double t, const AtomicMeasure& m) const {
    return outer_.dt(t, inner_integrals(m));
}

CylinderFunctional::Frozen CylinderFunctional::freeze(double t, const AtomicMeasure& m) const {
    return Frozen{this, outer_.dy(t, inner_integrals(m))};
}

double CylinderFunctional::Frozen::lfd(const Vec& x) const {
    double s = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) s += weights[i] * f->inner_[i].value(x);
    return s;
}

Vec CylinderFunctional::Frozen::lfd_gradient(const Vec& x) const {
    Vec g(x.size(), 0.0);
    for (std::size_t i = 0; i < weights.size(); ++i) {
        Vec gi = f->inner_[i].gradient(x);
        for (std::size_t j = 0; j < g.size(); ++j) g[j] += weights[i] * gi[j];
    }
    return g;
}

Mat CylinderFunctional::Frozen::lfd_hessian(const Vec& x) const {
    Mat h(x.size() * x.size(), 0.0);
    for (std::size_t i = 0; i < weights.size(); ++i) {
        Mat hi = f->inner_[i].hessian(x);
        for (std::size_t j = 0; j < h.size(); ++j) h[j] += weights[i] * hi[j];
    }
    return h;
}

double CylinderFunctional::lfd(double t, const AtomicMeasure& m, const Vec& x) const {
    return freeze(t, m).lfd(x);
}

Vec CylinderFunctional::lfd_gradient(double t, const AtomicMeasure& m, const Vec& x) const {
    return freeze(t, m).lfd_gradient(x);
}

Mat CylinderFunctional::lfd_hessian(double t, const AtomicMeasure& m, const Vec& x) const {
    return freeze(t, m).lfd_hessian(x);
}

namespace {

Mat sigma_sigma_t(const Mat& s, int d) {
    Mat out(static_cast<std::size_t>(d) * d, 0.0);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            double v = 0.0;
            for (int k = 0; k < d; ++k)
                v += s[static_cast<std::size_t>(i) * d + k] * s[static_cast<std::size_t>(j) * d + k];
            out[static_cast<std::size_t>(i) * d + j] = v;
        }
    return out;
}

double half_trace_product(const Mat& a, const Mat& b, int d) {
    double v = 0.0;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            v += a[static_cast<std::size_t>(i) * d + j] * b[static_cast<std::size_t>(j) * d + i];
    return 0.5 * v;
}

}  // namespace

double generator_apply(const ModelSpec& model, const Policy& policy, const CylinderFunctional& F,
                       double t, const AtomicMeasure& m) {
    const int d = model.dim;
    MeasureContext ctx = MeasureContext::from(m);
    auto frozen = F.freeze(t, m);
    double total = 0.0;
    for (const auto& atom : m.atoms()) {
        const Vec& x = atom.position;
        Vec a = policy.evaluate(t, x);
        Vec b = model.drift(t, x, ctx, a);
        Mat sst = sigma_sigma_t(model.sigma(t, x, ctx, a), d);
        Vec grad = frozen.lfd_gradient(x);
        Mat hess = frozen.lfd_hessian(x);
        double v = 0.0;
        for (int i = 0; i < d; ++i) v += b[i] * grad[i];
        v += half_trace_product(sst, hess, d);
        v += model.branching_rate(t, x, ctx, a) * frozen.lfd(x);
        total += atom.weight * v;
    }
    return total;
}

HamiltonianResult hamiltonian_G(const ModelSpec& model, const CostSpec& cost, double t,
                                const AtomicMeasure& m, const HamiltonianFields& fields,
                                const std::vector<Vec>& action_grid) {
    if (action_grid.empty()) throw std::invalid_argument("hamiltonian_G: empty action grid");
    const int d = model.dim;
    MeasureContext ctx = MeasureContext::from(m);
    HamiltonianResult best;
    bool first = true;
    for (const Vec& a : action_grid) {
        double total = 0.0;
        for (const auto& atom : m.atoms()) {
            const Vec& x = atom.position;
            double v = cost.eval_running(t, x, ctx, a);
            Vec b = model.drift(t, x, ctx, a);
            Vec p = fields.p(x);
            for (int i = 0; i < d; ++i) v += b[i] * p[i];
            Mat sst = sigma_sigma_t(model.sigma(t, x, ctx, a), d);
            v += half_trace_product(sst, fields.q(x), d);
            v += model.branching_rate(t, x, ctx, a) * fields.r(x);
            total += atom.weight * v;
        }
        if (first || total < best.value) {
            best.value = total;
            best.argmin_action = a;
            first = false;
        }
    }
    return best;
}

std::vector<Vec> action_grid_box(const Vec& a_lo, const Vec& a_hi, int points_per_axis) {
    if (a_lo.size() != a_hi.size() || a_lo.empty())
        throw std::invalid_argument("action_grid_box: bad box");
    if (points_per_axis < 2) throw std::invalid_argument("action_grid_box: need >= 2 points");
    const std::size_t n = a_lo.size();
    std::vector<Vec> grid;
    std::vector<int> idx(n, 0);
    for (;;) {
        Vec a(n);
        for (std::size_t i = 0; i < n; ++i)
            a[i] = a_lo[i] +
                   (a_hi[i] - a_lo[i]) * static_cast<double>(idx[i]) / (points_per_axis - 1.0);
        grid.push_back(std::move(a));
        std::size_t k = 0;
        while (k < n && ++idx[k] == points_per_axis) idx[k++] = 0;
        if (k == n) break;
    }
    return grid;
}

namespace {

/// Streams everything the telescoped expansion needs: per-replica endpoint
/// inner integrals at the two cut steps, per-replica generator
/// contributions summed over the window (outer-derivative weights and the
/// time-derivative term frozen at the full-sample mean measure).
class ItoAccumulator : public StepObserver {
  public:
    ItoAccumulator(const ModelSpec& model, const Policy& policy, const CylinderFunctional& F,
                   double dt, std::size_t s_idx, std::size_t t_idx)
        : model_(model), policy_(policy), F_(F), dt_(dt), s_idx_(s_idx), t_idx_(t_idx) {}

    void on_state(std::size_t step, double time, const std::vector<Configuration>& replicas,
                  const AtomicMeasure& mu_hat) override {
        if (step < s_idx_ || step > t_idx_) return;
        const std::size_t M = replicas.size();
        if (integral_.empty()) integral_.assign(M, 0.0);

        if (step == s_idx_) start_y_ = per_replica_integrals(replicas);
        if (step == t_idx_) end_y_ = per_replica_integrals(replicas);
        if (step == t_idx_) return;

        const int d = model_.dim;
        MeasureContext ctx = MeasureContext::from(mu_hat);
        auto frozen = F_.freeze(time, mu_hat);
        double dtf = F_.time_derivative(time, mu_hat);
        dt_term_ += dt_ * dtf;
        double sweep = 0.0;
        for (std::size_t r = 0; r < M; ++r) {
            double contrib = 0.0;
            for (const auto& [k, x] : replicas[r].particles()) {
                Vec a = policy_.evaluate(time, x);
                Vec b = model_.drift(time, x, ctx, a);
                Mat sst = sigma_sigma_t(model_.sigma(time, x, ctx, a), d);
                Vec grad = frozen.lfd_gradient(x);
                double v = 0.0;
                for (int i = 0; i < d; ++i) v += b[i] * grad[i];
                v += half_trace_product(sst, frozen.lfd_hessian(x), d);
                v += model_.branching_rate(time, x, ctx, a) * frozen.lfd(x);
                contrib += v;
            }
            integral_[r] += dt_ * contrib;
            sweep += contrib;
        }
        generator_sup_ =
            std::max(generator_sup_, std::abs(sweep / static_cast<double>(M)) + std::abs(dtf));
    }

    // [replica][field index]
    std::vector<std::vector<double>> per_replica_integrals(
        const std::vector<Configuration>& replicas) const {
        std::vector<std::vector<double>> out(replicas.size());
        for (std::size_t r = 0; r < replicas.size(); ++r) {
            std::vector<double> y(F_.arity(), 0.0);
            for (const auto& [k, x] : replicas[r].particles())
                for (std::size_t i = 0; i < F_.arity(); ++i) y[i] += F_.inner()[i].value(x);
            out[r] = std::move(y);
        }
        return out;
    }

    const std::vector<double>& integral() const { return integral_; }
    const std::vector<std::vector<double>>& start_y() const { return start_y_; }
    const std::vector<std::vector<double>>& end_y() const { return end_y_; }
    double dt_term() const { return dt_term_; }
    double generator_sup() const { return generator_sup_; }

  private:
    const ModelSpec& model_;
    const Policy& policy_;
    const CylinderFunctional& F_;
    double dt_;
    std::size_t s_idx_, t_idx_;
    std::vector<double> integral_;
    std::vector<std::vector<double>> start_y_, end_y_;
    double dt_term_ = 0.0;
    double generator_sup_ = 0.0;
};

std::size_t grid_index(const SimConfig& cfg, double s, const char* what) {
    double rel = (s - cfg.t0) / cfg.dt;
    auto idx = std::llround(rel);
    if (idx < 0 || static_cast<std::size_t>(idx) > cfg.steps() ||
        std::abs(rel - static_cast<double>(idx)) > 1e-9)
        throw std::invalid_argument(std::string("ito_residual: ") + what + " off the time grid");
    return static_cast<std::size_t>(idx);
}

}  // namespace

ItoReport ito_residual(const ModelSpec& model, const Policy& policy, const CylinderFunctional& F,
                       const InitSampler& init, const SimConfig& cfg, double s, double t,
                       int bootstrap_resamples) {
    std::size_t s_idx = grid_index(cfg, s, "start time");
    std::size_t t_idx = grid_index(cfg, t, "end time");
    if (s_idx >= t_idx) throw std::invalid_argument("ito_residual: need s < t");

    ItoAccumulator acc(model, policy, F, cfg.dt, s_idx, t_idx);
    std::vector<StepObserver*> obs{&acc};
    simulate(model, policy, init, cfg, obs);

    const std::size_t M = acc.integral().size();
    const std::size_t K = F.arity();
    auto eval = [&](const std::vector<std::size_t>& pick) {
        std::vector<double> ys(K, 0.0), yt(K, 0.0);
        double integ = 0.0;
        for (std::size_t r : pick) {
            for (std::size_t i = 0; i < K; ++i) {
                ys[i] += acc.start_y()[r][i];
                yt[i] += acc.end_y()[r][i];
            }
            integ += acc.integral()[r];
        }
        double inv = 1.0 / static_cast<double>(pick.size());
        for (auto& v : ys) v *= inv;
        for (auto& v : yt) v *= inv;
        integ *= inv;
        return std::array<double, 3>{F.outer_value(t, yt), F.outer_value(s, ys), integ};
    };

    std::vector<std::size_t> all(M);
    for (std::size_t r = 0; r < M; ++r) all[r] = r;
    auto full = eval(all);

    ItoReport rep;
    rep.f_end = full[0];
    rep.f_start = full[1];
    rep.residual = full[0] - full[1] - acc.dt_term() - full[2];
    rep.c_f = acc.generator_sup();

    if (bootstrap_resamples > 1 && M > 1) {
        std::vector<double> rs;
        rs.reserve(bootstrap_resamples);
        for (int b = 0; b < bootstrap_resamples; ++b) {
            RngStream rng(cfg.seed ^ 0x626f6f74ULL, static_cast<std::uint64_t>(b), 0,
                          Channel::event, 0);
            std::vector<std::size_t> pick(M);
            for (std::size_t r = 0; r < M; ++r)
                pick[r] = std::min<std::size_t>(static_cast<std::size_t>(rng.u01() * M), M - 1);
            auto vals = eval(pick);
            rs.push_back(vals[0] - vals[1] - acc.dt_term() - vals[2]);
        }
        double mean = 0.0;
        for (double v : rs) mean += v;
        mean /= static_cast<double>(rs.size());
        double ss = 0.0;
        for (double v : rs) ss += (v - mean) * (v - mean);
        rep.stderr = std::sqrt(ss / (static_cast<double>(rs.size()) - 1.0));
    }
    return rep;
}

double AuxFunction::operator()(double t, const AtomicMeasure& m) const {
    double inner = 0.0;
    for (const auto& a : m.atoms()) {
        double n2 = 0.0;
        for (double xi : a.position) n2 += xi * xi;
        inner += a.weight * std::sqrt(1.0 + n2);
    }
    double mass = m.total_mass();
    return std::exp(-L_coeff * t) * (inner + mass * mass);
}

double aux_exclusion_threshold(double t, double c1, double c2, double L_coeff) {
    double el = std::exp(L_coeff * t);
    double b = 1.0 - c2 * el;
    return 0.5 * (-b + std::sqrt(b * b + 4.0 * c1 * el));
}

AuxReport aux_sublevel_check(const std::vector<std::pair<double, AtomicMeasure>>& samples,
                             double c1, double c2, double L_coeff, double T_horizon,
                             double tail_radius) {
    AuxReport rep;
    AuxFunction theta{L_coeff};
    rep.mass_cap = aux_exclusion_threshold(T_horizon, c1, c2, L_coeff);
    const double tail_budget =
        std::exp(L_coeff * T_horizon) * (c1 + c2 * rep.mass_cap) / tail_radius;
    for (const auto& [t, m] : samples) {
        double mass = m.total_mass();
        if (theta(t, m) > c1 + c2 * mass) continue;
        ++rep.in_sublevel;
        if (mass > rep.mass_cap + 1e-12) ++rep.violations;
        double tail = 0.0;
        for (const auto& a : m.atoms())
            if (euclidean_norm(a.position) > tail_radius) tail += a.weight;
        if (tail > tail_budget + 1e-12) ++rep.violations;
    }
    rep.holds = rep.violations == 0;
    return rep;
}

}  // namespace bmv

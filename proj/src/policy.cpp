#include "bmv/policy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "bmv/rng.hpp"

namespace bmv {

PolicyFamily policy_family_from_string(const std::string& name) {
    if (name == "constant") return PolicyFamily::constant;
    if (name == "affine_clamped") return PolicyFamily::affine_clamped;
    if (name == "tanh_features") return PolicyFamily::tanh_features;
    throw std::invalid_argument("unknown policy family: " + name);
}

std::string to_string(PolicyFamily family) {
    switch (family) {
        case PolicyFamily::constant: return "constant";
        case PolicyFamily::affine_clamped: return "affine_clamped";
        case PolicyFamily::tanh_features: return "tanh_features";
    }
    return "?";
}

std::size_t Policy::param_count_for(PolicyFamily family, int state_dim, int action_dim) {
    auto n = static_cast<std::size_t>(action_dim);
    auto d = static_cast<std::size_t>(state_dim);
    switch (family) {
        case PolicyFamily::constant: return n;
        case PolicyFamily::affine_clamped: return n * (d + 1);
        case PolicyFamily::tanh_features: return n * (d + 2);
    }
    return 0;
}

Policy::Policy(PolicyFamily family, int state_dim, int action_dim, Vec a_lo, Vec a_hi,
               std::vector<double> params)
    : family_(family),
      state_dim_(state_dim),
      action_dim_(action_dim),
      a_lo_(std::move(a_lo)),
      a_hi_(std::move(a_hi)),
      params_(std::move(params)) {
    if (static_cast<int>(a_lo_.size()) != action_dim_ ||
        static_cast<int>(a_hi_.size()) != action_dim_)
        throw std::invalid_argument("Policy: action box dimension mismatch");
    for (int i = 0; i < action_dim_; ++i)
        if (!(a_lo_[i] <= a_hi_[i])) throw std::invalid_argument("Policy: empty action box");
    if (params_.size() != param_count_for(family_, state_dim_, action_dim_))
        throw std::invalid_argument("Policy: wrong parameter count");
}

Policy Policy::constant(Vec action, Vec a_lo, Vec a_hi, int state_dim) {
    int n = static_cast<int>(action.size());
    return Policy(PolicyFamily::constant, state_dim, n, std::move(a_lo), std::move(a_hi),
                  std::move(action));
}

Policy Policy::with_params(std::vector<double> params) const {
    return Policy(family_, state_dim_, action_dim_, a_lo_, a_hi_, std::move(params));
}

Vec Policy::evaluate(double, const Vec& x) const {
    Vec a(action_dim_, 0.0);
    auto d = static_cast<std::size_t>(state_dim_);
    switch (family_) {
        case PolicyFamily::constant:
            for (int i = 0; i < action_dim_; ++i) a[i] = params_[i];
            break;
        case PolicyFamily::affine_clamped:
            // per action coordinate: c_i + sum_j A_ij x_j
            for (int i = 0; i < action_dim_; ++i) {
                const double* row = params_.data() + static_cast<std::size_t>(i) * (d + 1);
                a[i] = row[0];
                for (std::size_t j = 0; j < d; ++j) a[i] += row[1 + j] * x[j];
            }
            break;
        case PolicyFamily::tanh_features:
            // per action coordinate: c_i + s_i * tanh(sum_j w_ij x_j)
            for (int i = 0; i < action_dim_; ++i) {
                const double* row = params_.data() + static_cast<std::size_t>(i) * (d + 2);
                double z = 0.0;
                for (std::size_t j = 0; j < d; ++j) z += row[2 + j] * x[j];
                a[i] = row[0] + row[1] * std::tanh(z);
            }
            break;
    }
    for (int i = 0; i < action_dim_; ++i) a[i] = std::clamp(a[i], a_lo_[i], a_hi_[i]);
    return a;
}

double Policy::certified_lipschitz() const {
    auto d = static_cast<std::size_t>(state_dim_);
    double lip_sq = 0.0;
    switch (family_) {
        case PolicyFamily::constant:
            return 0.0;
        case PolicyFamily::affine_clamped:
            for (int i = 0; i < action_dim_; ++i) {
                const double* row = params_.data() + static_cast<std::size_t>(i) * (d + 1);
                double r = 0.0;
                for (std::size_t j = 0; j < d; ++j) r += row[1 + j] * row[1 + j];
                lip_sq += r;
            }
            return std::sqrt(lip_sq);
        case PolicyFamily::tanh_features:
            for (int i = 0; i < action_dim_; ++i) {
                const double* row = params_.data() + static_cast<std::size_t>(i) * (d + 2);
                double r = 0.0;
                for (std::size_t j = 0; j < d; ++j) r += row[2 + j] * row[2 + j];
                lip_sq += row[1] * row[1] * r;
            }
            return std::sqrt(lip_sq);
    }
    return 0.0;
}

double Policy::certified_growth() const {
    Vec zero(state_dim_, 0.0);
    return euclidean_norm(evaluate(0.0, zero));
}

double Policy::probe_lipschitz(std::uint64_t seed, int pairs, double span) const {
    RngStream rng(seed, 0, 0, Channel::init, 0);
    double worst = 0.0;
    for (int p = 0; p < pairs; ++p) {
        Vec x(state_dim_), y(state_dim_);
        for (int i = 0; i < state_dim_; ++i) {
            x[i] = (2.0 * rng.u01() - 1.0) * span;
            y[i] = (2.0 * rng.u01() - 1.0) * span;
        }
        double dx = euclidean_dist(x, y);
        if (dx < 1e-9) continue;
        double da = euclidean_dist(evaluate(0.0, x), evaluate(0.0, y));
        worst = std::max(worst, da / dx);
    }
    return worst;
}

}  // namespace bmv

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bmv/measure.hpp"

namespace bmv {

enum class PolicyFamily { constant, affine_clamped, tanh_features };

PolicyFamily policy_family_from_string(const std::string& name);
std::string to_string(PolicyFamily family);

/// Closed-loop Lipschitz control alpha(t, x) with values in the box
/// [a_lo, a_hi]^n (coordinatewise clamp is part of evaluation) and
/// certified Lipschitz/growth constants derived from the parameters.
class Policy {
  public:
    Policy() = default;
    Policy(PolicyFamily family, int state_dim, int action_dim, Vec a_lo, Vec a_hi,
           std::vector<double> params);

    static Policy constant(Vec action, Vec a_lo, Vec a_hi, int state_dim = 1);

    PolicyFamily family() const { return family_; }
    int state_dim() const { return state_dim_; }
    int action_dim() const { return action_dim_; }
    const std::vector<double>& params() const { return params_; }
    std::size_t param_count() const { return params_.size(); }
    const Vec& box_lo() const { return a_lo_; }
    const Vec& box_hi() const { return a_hi_; }

    static std::size_t param_count_for(PolicyFamily family, int state_dim, int action_dim);

    Policy with_params(std::vector<double> params) const;

    Vec evaluate(double t, const Vec& x) const;

    /// Certified Lipschitz constant of the unclamped map (clamping is
    /// 1-Lipschitz, so it also bounds the evaluated policy).
    double certified_lipschitz() const;
    /// Certified bound on |alpha(t, 0)|.
    double certified_growth() const;

    /// Largest finite-difference ratio |a(x)-a(y)|/|x-y| over n random
    /// pairs; used to validate the certificate.
    double probe_lipschitz(std::uint64_t seed, int pairs = 200, double span = 5.0) const;

  private:
    PolicyFamily family_ = PolicyFamily::constant;
    int state_dim_ = 1;
    int action_dim_ = 1;
    Vec a_lo_, a_hi_;
    std::vector<double> params_;
};

}  // namespace bmv

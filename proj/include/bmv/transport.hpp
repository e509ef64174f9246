#pragma once

#include <functional>
#include <vector>

#include "bmv/measure.hpp"

namespace bmv {

/// Exact transportation problem on dense cost matrix: minimize
/// sum_ij f_ij c_ij over nonnegative f with row sums = supply and
/// column sums = demand. Total supply must equal total demand.
/// Solved by successive shortest augmenting paths; exact at desk scale.
double solve_transport(const std::vector<double>& supply, const std::vector<double>& demand,
                       const std::vector<std::vector<double>>& cost);

/// Truncated Wasserstein-1 distance with cemetery padding.
/// Ground cost rho(x,y) = |x-y| /\ 1 between real atoms,
/// rho(x, cemetery) = (|x-x0| /\ 1) + 1, rho(cemetery, cemetery) = 0.
/// The lighter measure is padded with cemetery mass to the common level;
/// the value is independent of any padding above max(mass1, mass2).
double truncated_w1(const AtomicMeasure& m1, const AtomicMeasure& m2,
                    const Vec& base_point = {});

/// Same, with an explicit common padding mass >= max(mass1, mass2).
double truncated_w1_padded(const AtomicMeasure& m1, const AtomicMeasure& m2, const Vec& base_point,
                           double common_mass);

/// A trial potential for the dual bound: carries a certified Lipschitz
/// constant w.r.t. the truncated ground distance and a point where it
/// vanishes. Trials failing either certificate are rejected.
struct TrialFunction {
    std::function<double(const Vec&)> phi;
    double lipschitz_bound = 1.0;
    Vec vanish_point;
};

/// Dual lower bound: max over trials of
/// |<m1 - m2, phi - phi(x0)>| + |m1(R^d) - m2(R^d)|,
/// where x0 is the cemetery base point. Anchoring at x0 keeps the bound
/// below truncated_w1 regardless of where the trial happens to vanish.
double w1_dual_lower_bound(const AtomicMeasure& m1, const AtomicMeasure& m2,
                           const std::vector<TrialFunction>& trials,
                           const Vec& base_point = {});

}  // namespace bmv

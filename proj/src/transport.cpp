#include "bmv/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace bmv {

namespace {

constexpr double kEps = 1e-12;

}  // namespace

double solve_transport(const std::vector<double>& supply, const std::vector<double>& demand,
                       const std::vector<std::vector<double>>& cost) {
    const std::size_t n = supply.size();
    const std::size_t m = demand.size();
    double total_supply = 0.0, total_demand = 0.0;
    for (double s : supply) {
        if (s < -kEps) throw std::invalid_argument("solve_transport: negative supply");
        total_supply += s;
    }
    for (double d : demand) {
        if (d < -kEps) throw std::invalid_argument("solve_transport: negative demand");
        total_demand += d;
    }
    if (std::abs(total_supply - total_demand) > 1e-9 * (1.0 + total_supply))
        throw std::invalid_argument("solve_transport: unbalanced instance");
    if (n == 0 || m == 0) return 0.0;

    // Successive shortest paths on the residual bipartite graph with
    // Bellman-Ford (residual arcs can have negative cost). Each
    // augmentation exhausts a source or a sink, so at most n+m rounds.
    std::vector<std::vector<double>> flow(n, std::vector<double>(m, 0.0));
    std::vector<double> rem_supply = supply;
    std::vector<double> rem_demand = demand;
    double value = 0.0;

    for (;;) {
        double pending = 0.0;
        for (double s : rem_supply) pending += s;
        if (pending <= kEps * (1.0 + total_supply)) break;

        // dist over nodes: sources [0,n), sinks [n, n+m)
        const double inf = std::numeric_limits<double>::infinity();
        std::vector<double> dist(n + m, inf);
        std::vector<int> prev(n + m, -1);
        for (std::size_t i = 0; i < n; ++i)
            if (rem_supply[i] > kEps) dist[i] = 0.0;

        bool changed = true;
        std::size_t rounds = 0;
        while (changed && rounds++ <= n + m + 1) {
            changed = false;
            for (std::size_t i = 0; i < n; ++i) {
                if (dist[i] == inf) continue;
                for (std::size_t j = 0; j < m; ++j) {
                    double nd = dist[i] + cost[i][j];
                    if (nd < dist[n + j] - kEps) {
                        dist[n + j] = nd;
                        prev[n + j] = static_cast<int>(i);
                        changed = true;
                    }
                }
            }
            for (std::size_t j = 0; j < m; ++j) {
                if (dist[n + j] == inf) continue;
                for (std::size_t i = 0; i < n; ++i) {
                    if (flow[i][j] <= kEps) continue;
                    double nd = dist[n + j] - cost[i][j];
                    if (nd < dist[i] - kEps) {
                        dist[i] = nd;
                        prev[i] = static_cast<int>(n + j);
                        changed = true;
                    }
                }
            }
        }

        // cheapest reachable sink with remaining demand
        int best = -1;
        for (std::size_t j = 0; j < m; ++j)
            if (rem_demand[j] > kEps && dist[n + j] < inf &&
                (best < 0 || dist[n + j] < dist[n + best]))
                best = static_cast<int>(j);
        if (best < 0) throw std::runtime_error("solve_transport: no augmenting path");

        // bottleneck along the path: residual arcs are capped by existing
        // flow, the endpoints by remaining supply/demand
        double bottleneck = rem_demand[best];
        int node = static_cast<int>(n) + best;
        while (prev[node] >= 0) {
            int p = prev[node];
            if (node < static_cast<int>(n))
                bottleneck = std::min(bottleneck, flow[node][p - static_cast<int>(n)]);
            node = p;
        }
        // node is now the originating source
        bottleneck = std::min(bottleneck, rem_supply[node]);

        // apply augmentation
        int cur = static_cast<int>(n) + best;
        while (prev[cur] >= 0) {
            int p = prev[cur];
            if (cur >= static_cast<int>(n)) {
                flow[p][cur - static_cast<int>(n)] += bottleneck;
                value += bottleneck * cost[p][cur - static_cast<int>(n)];
            } else {
                flow[cur][p - static_cast<int>(n)] -= bottleneck;
                value -= bottleneck * cost[cur][p - static_cast<int>(n)];
            }
            cur = p;
        }
        rem_supply[cur] -= bottleneck;
        rem_demand[best] -= bottleneck;
    }
    return value;
}

namespace {

double truncated_dist(const Vec& a, const Vec& b) { return std::min(euclidean_dist(a, b), 1.0); }

double w1_on_padded(const AtomicMeasure& m1, const AtomicMeasure& m2, const Vec& x0,
                    double common_mass) {
    const auto a1 = m1.normalized();
    const auto a2 = m2.normalized();
    double mass1 = a1.total_mass(), mass2 = a2.total_mass();
    if (common_mass < std::max(mass1, mass2) - kEps)
        throw std::invalid_argument("truncated_w1: padding below max mass");

    std::vector<double> supply, demand;
    std::vector<std::vector<double>> cost;
    const std::size_t n = a1.size() + 1;  // last row/column is the cemetery
    const std::size_t m = a2.size() + 1;
    supply.reserve(n);
    for (const auto& a : a1.atoms()) supply.push_back(a.weight);
    supply.push_back(common_mass - mass1);
    for (const auto& a : a2.atoms()) demand.push_back(a.weight);
    demand.push_back(common_mass - mass2);

    cost.assign(n, std::vector<double>(m, 0.0));
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const auto& xi = a1.atoms()[i].position;
        for (std::size_t j = 0; j + 1 < m; ++j)
            cost[i][j] = truncated_dist(xi, a2.atoms()[j].position);
        cost[i][m - 1] = truncated_dist(xi, x0) + 1.0;
    }
    for (std::size_t j = 0; j + 1 < m; ++j)
        cost[n - 1][j] = truncated_dist(a2.atoms()[j].position, x0) + 1.0;
    cost[n - 1][m - 1] = 0.0;

    return solve_transport(supply, demand, cost);
}

}  // namespace

double truncated_w1(const AtomicMeasure& m1, const AtomicMeasure& m2, const Vec& base_point) {
    if (m1.dim() != m2.dim()) throw std::invalid_argument("truncated_w1: dimension mismatch");
    Vec x0 = base_point.empty() ? Vec(m1.dim(), 0.0) : base_point;
    if (static_cast<int>(x0.size()) != m1.dim())
        throw std::invalid_argument("truncated_w1: base point dimension mismatch");
    double common = std::max(m1.total_mass(), m2.total_mass());
    return w1_on_padded(m1, m2, x0, common);
}

double truncated_w1_padded(const AtomicMeasure& m1, const AtomicMeasure& m2, const Vec& base_point,
                           double common_mass) {
    if (m1.dim() != m2.dim()) throw std::invalid_argument("truncated_w1: dimension mismatch");
    Vec x0 = base_point.empty() ? Vec(m1.dim(), 0.0) : base_point;
    return w1_on_padded(m1, m2, x0, common_mass);
}

double w1_dual_lower_bound(const AtomicMeasure& m1, const AtomicMeasure& m2,
                           const std::vector<TrialFunction>& trials, const Vec& base_point) {
    Vec x0 = base_point.empty() ? Vec(m1.dim(), 0.0) : base_point;
    double best = 0.0;
    for (const auto& trial : trials) {
        if (trial.lipschitz_bound > 1.0 + kEps)
            throw std::invalid_argument("w1_dual_lower_bound: trial Lipschitz bound exceeds 1");
        if (trial.vanish_point.empty() || std::abs(trial.phi(trial.vanish_point)) > 1e-9)
            throw std::invalid_argument("w1_dual_lower_bound: trial has no certified vanishing point");
        // subtracting phi(x0) keeps |phi| below the cemetery surcharge
        double phi0 = trial.phi(x0);
        double gap = std::abs(m1.integrate(trial.phi) - m2.integrate(trial.phi) -
                              phi0 * (m1.total_mass() - m2.total_mass()));
        best = std::max(best, gap);
    }
    return best + std::abs(m1.total_mass() - m2.total_mass());
}

}  // namespace bmv

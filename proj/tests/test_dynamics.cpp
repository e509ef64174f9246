#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "bmv/diagnostics.hpp"
#include "bmv/simulate.hpp"

using namespace bmv;

namespace {

Policy zero_policy() { return Policy::constant({0.0}, {-1.0}, {1.0}); }

AtomicMeasure delta(double x, double w = 1.0) { return AtomicMeasure::from_1d({{x, w}}); }

}  // namespace

TEST_CASE("config validation") {
    auto model = make_model("zero", "zero", "constant 0.5", "binary", 1, 1.0);
    SimConfig cfg;
    cfg.dt = 2.0;  // dt * gamma_bar >= 1
    CHECK_THROWS(cfg.validate(model.gamma_bar));
    cfg.dt = -0.1;
    CHECK_THROWS(cfg.validate(model.gamma_bar));
    cfg.dt = 0.1;
    cfg.replicas = 0;
    CHECK_THROWS(cfg.validate(model.gamma_bar));
    cfg.replicas = 1;
    cfg.T = -1.0;
    CHECK_THROWS(cfg.validate(model.gamma_bar));
    cfg.T = 1.0;
    cfg.interaction = SimConfig::Interaction::frozen;
    CHECK_THROWS(cfg.validate(model.gamma_bar));
    cfg.frozen_flow.push_back(delta(0.0));
    CHECK_NOTHROW(cfg.validate(model.gamma_bar));
}

TEST_CASE("no branching keeps the label set") {
    auto model = make_model("constant 0.2", "constant 0.5", "zero", "binary", 1, 1.0);
    SimConfig cfg;
    cfg.T = 0.2;
    cfg.dt = 1e-2;
    cfg.replicas = 8;
    cfg.seed = 3;
    auto path = simulate_recorded(model, zero_policy(), fixed_sampler(delta(0.0) + delta(1.0)), cfg);
    CHECK(path.events.empty());
    for (const auto& state : path.states)
        for (const auto& e : state) {
            CHECK(e.size() == 2);
            CHECK(e.contains(Label({1})));
            CHECK(e.contains(Label({2})));
        }
}

TEST_CASE("single-offspring branching keeps the particle count") {
    auto model = make_model("zero", "constant 1.0", "constant 1.0", "identity", 1, 1.0);
    SimConfig cfg;
    cfg.T = 0.5;
    cfg.dt = 1e-2;
    cfg.replicas = 16;
    cfg.seed = 5;
    CountTracker counts;
    std::vector<StepObserver*> obs{&counts};
    simulate(model, zero_policy(), fixed_sampler(delta(0.0)), cfg, obs);
    for (const auto& row : counts.counts())
        for (auto c : row) CHECK(c == 1);
    CHECK(counts.sup_counts() == std::vector<std::uint32_t>(16, 1));
}

TEST_CASE("bitwise reproducibility") {
    auto model = make_model("affine -0.5 0.1", "constant 0.8", "constant 0.5", "binary", 1, 1.0);
    SimConfig cfg;
    cfg.T = 0.4;
    cfg.dt = 5e-3;
    cfg.replicas = 12;
    cfg.seed = 17;
    auto init = poissonized_sampler(delta(0.3, 2.0));
    auto p1 = simulate_recorded(model, zero_policy(), init, cfg);
    auto p2 = simulate_recorded(model, zero_policy(), init, cfg);
    REQUIRE(p1.events.size() == p2.events.size());
    REQUIRE(p1.states.size() == p2.states.size());
    for (std::size_t s = 0; s < p1.states.size(); ++s)
        for (std::size_t r = 0; r < p1.states[s].size(); ++r)
            CHECK(d_E(p1.states[s][r], p2.states[s][r]) == 0.0);
}

TEST_CASE("flow property: restart mid-horizon replays the same noise") {
    auto model = make_model("affine -1.0 0.0", "constant 1.0", "constant 0.5", "binary", 1, 1.0);
    SimConfig cfg;
    cfg.T = 1.0;
    cfg.dt = 1e-2;
    cfg.replicas = 1;
    cfg.seed = 29;
    auto full = simulate_recorded(model, zero_policy(), fixed_sampler(delta(0.4)), cfg);

    auto mid = full.index_of(0.5);
    Configuration snapshot = full.states[mid][0];
    SimConfig tail_cfg = cfg;
    tail_cfg.t0 = 0.5;
    auto tail = simulate_recorded(model, zero_policy(),
                                  [snapshot](RngStream&) { return snapshot; }, tail_cfg);

    REQUIRE(tail.times.size() == full.times.size() - mid);
    for (std::size_t s = 0; s < tail.times.size(); ++s) {
        const auto& a = full.states[mid + s][0];
        const auto& b = tail.states[s][0];
        REQUIRE(a.size() == b.size());
        for (const auto& [k, x] : a.particles()) {
            REQUIRE(b.contains(k));
            CHECK(b.position(k) == x);  // bitwise
        }
    }
}

TEST_CASE("pure death mass law e^{-s}") {
    auto model = make_model("zero", "zero", "constant 1.0", "death", 1, 1.0);
    SimConfig cfg;
    cfg.T = 1.0;
    cfg.dt = 2e-3;
    cfg.replicas = 4000;
    cfg.seed = 31;
    CountTracker counts;
    std::vector<StepObserver*> obs{&counts};
    simulate(model, zero_policy(), fixed_sampler(delta(0.0)), cfg, obs);
    for (double s : {0.25, 0.5, 1.0}) {
        auto est = counts.mass_at_step(counts.step_of(s));
        double target = std::exp(-s);
        CHECK(std::abs(est.mean - target) <= 3.5 * est.stderr + 2.0 * cfg.dt);
    }
}

TEST_CASE("binary branching mean count e^{s} and moment bounds") {
    auto model = make_model("zero", "zero", "constant 1.0", "binary", 1, 1.0);
    SimConfig cfg;
    cfg.T = 0.5;
    cfg.dt = 2e-3;
    cfg.replicas = 3000;
    cfg.seed = 37;
    CountTracker counts;
    std::vector<StepObserver*> obs{&counts};
    simulate(model, zero_policy(), fixed_sampler(delta(0.0)), cfg, obs);
    auto terminal = counts.mass_at_step(counts.step_of(0.5));
    CHECK(std::abs(terminal.mean - std::exp(0.5)) <= 3.5 * terminal.stderr + 2.0 * cfg.dt);

    auto first = check_first_moment_bound(counts, model, cfg.T - cfg.t0);
    CHECK(first.holds);
    CHECK(first.bound == doctest::Approx(std::exp(1.0)));  // gamma_bar * M1 * h = 1
    auto second = check_second_moment_bound(counts, model, cfg.T - cfg.t0);
    CHECK(second.holds);
}

TEST_CASE("mean-field coupling: drift through the mass") {
    // b = mass, sigma = 0, no branching: x_t = x_0 + mass * t exactly
    auto model = make_model("mass_coupled 0.0 0.0 1.0", "zero", "zero", "binary", 1, 1.0);
    SimConfig cfg;
    cfg.T = 1.0;
    cfg.dt = 1e-2;
    cfg.replicas = 1;
    cfg.seed = 1;
    auto path = simulate_recorded(model, zero_policy(), fixed_sampler(delta(0.0)), cfg);
    CHECK(path.states.back()[0].position(Label({1}))[0] == doctest::Approx(1.0).epsilon(1e-12));

    SUBCASE("frozen interaction overrides the empirical mean") {
        SimConfig frozen = cfg;
        frozen.interaction = SimConfig::Interaction::frozen;
        frozen.frozen_flow = {delta(0.0, 2.0)};
        auto fp = simulate_recorded(model, zero_policy(), fixed_sampler(delta(0.0)), frozen);
        CHECK(fp.states.back()[0].position(Label({1}))[0] ==
              doctest::Approx(2.0).epsilon(1e-12));
    }
}

TEST_CASE("non-finite positions are reported") {
    auto model = make_model("affine 1e200 0.0", "zero", "zero", "binary", 1, 1.0);
    SimConfig cfg;
    cfg.T = 0.05;
    cfg.dt = 1e-2;
    cfg.replicas = 1;
    CHECK_THROWS_WITH_AS(
        simulate_recorded(model, zero_policy(), fixed_sampler(delta(1.0)), cfg),
        doctest::Contains("non-finite"), std::runtime_error);
}

TEST_CASE("time continuity scaling") {
    // mild branching so the diffusive sqrt(h) part dominates the fit
    auto model = make_model("zero", "constant 1.0", "constant 0.1", "binary", 1, 0.2);
    SimConfig cfg;
    cfg.T = 0.1;
    cfg.dt = 2e-3;
    cfg.replicas = 600;
    cfg.seed = 41;
    auto rep = check_time_continuity(model, zero_policy(), fixed_sampler(delta(0.0)), cfg, 0.0,
                                     {2 * cfg.dt, 8 * cfg.dt, 32 * cfg.dt});
    REQUIRE(rep.distances.size() == 3);
    for (double d : rep.distances) CHECK(d > 0.0);
    CHECK(rep.fitted_exponent <= 0.6);
    CHECK(rep.envelope_constant > 0.0);
}

TEST_CASE("coupled stability under initial perturbations") {
    auto model = make_model("affine -0.5 0.0", "constant 0.3", "constant 0.3", "binary", 1, 0.5);
    SimConfig cfg;
    cfg.T = 0.5;
    cfg.dt = 5e-3;
    cfg.replicas = 128;
    cfg.seed = 43;
    auto rep = check_path_stability(model, zero_policy(), fixed_sampler(delta(0.5)), cfg,
                                    {0.1, 0.05, 0.01});
    REQUIRE(rep.points.size() == 3);
    for (const auto& p : rep.points) {
        CHECK(p.d_e_initial > 0.0);
        CHECK(p.d_e_ratio > 0.0);
        CHECK(p.d_e_ratio < 50.0);  // no blow-up under the coupling
    }
    CHECK(rep.max_d_e_ratio >= rep.min_d_e_ratio);
}

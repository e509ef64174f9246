#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <sstream>

#include "bmv/configuration.hpp"
#include "bmv/measure.hpp"
#include "bmv/rng.hpp"

using namespace bmv;

TEST_CASE("integrate on atoms") {
    auto m = AtomicMeasure::from_1d({{1.0, 0.5}, {3.0, 0.5}});
    CHECK(m.integrate([](const Vec&) { return 1.0; }) == doctest::Approx(m.total_mass()));
    CHECK(m.integrate([](const Vec& x) { return x[0]; }) == doctest::Approx(2.0));

    auto d0 = AtomicMeasure::from_1d({{0.0, 2.0}});
    CHECK(d0.integrate([](const Vec& x) { return x[0] * x[0]; }) == 0.0);
}

TEST_CASE("integrate linear in phi, additive in m") {
    RngStream rng(4242, 0, 0, Channel::init, 0);
    for (int trial = 0; trial < 20; ++trial) {
        AtomicMeasure a(1), b(1);
        for (int i = 0; i < 3; ++i) {
            a.add_atom({4.0 * rng.u01() - 2.0}, 2.0 * rng.u01());
            b.add_atom({4.0 * rng.u01() - 2.0}, 2.0 * rng.u01());
        }
        auto f = [](const Vec& x) { return std::sin(x[0]); };
        auto g = [](const Vec& x) { return x[0] * x[0]; };
        auto fg = [&](const Vec& x) { return 2.0 * f(x) - 3.0 * g(x); };
        CHECK(a.integrate(fg) == doctest::Approx(2.0 * a.integrate(f) - 3.0 * a.integrate(g)));
        CHECK((a + b).integrate(f) == doctest::Approx(a.integrate(f) + b.integrate(f)));
    }
}

TEST_CASE("normalization drops zero weights, invariant under atom split") {
    AtomicMeasure m(1);
    m.add_atom({1.0}, 0.0);
    m.add_atom({2.0}, 1.5);
    CHECK(m.normalized().size() == 1);

    AtomicMeasure split(1), merged(1);
    split.add_atom({0.0}, 1.0);
    split.add_atom({0.0}, 1.0);
    merged.add_atom({0.0}, 2.0);
    auto f = [](const Vec& x) { return std::cos(x[0]); };
    CHECK(split.integrate(f) == doctest::Approx(merged.integrate(f)));
    CHECK(split.total_mass() == doctest::Approx(merged.total_mass()));
}

TEST_CASE("measure file round trip") {
    AtomicMeasure m(2);
    m.add_atom({0.125, -3.75}, 1.0 / 3.0);
    m.add_atom({1e-17, 42.0}, 2.0);
    std::ostringstream out;
    write_measure(out, m);
    std::istringstream in("# leading comment\n" + out.str());
    auto back = read_measure(in);
    REQUIRE(back.size() == m.size());
    CHECK(back.dim() == 2);
    for (std::size_t i = 0; i < m.size(); ++i) {
        CHECK(back.atoms()[i].weight == m.atoms()[i].weight);
        CHECK(back.atoms()[i].position == m.atoms()[i].position);
    }
}

TEST_CASE("label prefix order") {
    Label root;
    Label k1 = root.child(1);
    Label k12 = k1.child(2);
    CHECK(root.precedes(k1));
    CHECK(k1.precedes(k12));
    CHECK(!k12.precedes(k1));
    CHECK(!k1.precedes(k1));
    CHECK(k1.to_string() == "1");
    CHECK(k12.to_string() == "1.2");
    CHECK(root.to_string() == "*");
}

TEST_CASE("configuration enforces antichain") {
    Configuration e(1);
    e.insert(Label({1}), {0.0});
    CHECK_THROWS(e.insert(Label({1, 2}), {0.0}));
    CHECK_THROWS(e.insert(Label({1}), {1.0}));
    e.insert(Label({2}), {1.0});
    CHECK(e.size() == 2);

    e.branch(Label({1}), 3, {0.5});
    CHECK(e.size() == 4);
    CHECK(e.contains(Label({1, 1})));
    CHECK(e.contains(Label({1, 3})));
    CHECK(!e.contains(Label({1})));

    e.branch(Label({2}), 0, {0.0});
    CHECK(e.size() == 3);
}

TEST_CASE("config_to_measure") {
    Configuration empty(1);
    CHECK(config_to_measure(empty).total_mass() == 0.0);

    Configuration two(1);
    two.insert(Label({1}), {0.0});
    two.insert(Label({2}), {0.0});
    auto m = config_to_measure(two);
    CHECK(m.total_mass() == 2.0);
    CHECK(m.integrate([](const Vec& x) { return x[0]; }) == 0.0);
}

TEST_CASE("d_E examples") {
    Configuration a(1), b(1);
    a.insert(Label::root(), {0.0});
    b.insert(Label::root(), {0.5});
    CHECK(d_E(a, a) == 0.0);
    CHECK(d_E(a, b) == doctest::Approx(0.5));

    Configuration c(1);
    c.insert(Label({1}), {0.0});
    CHECK(d_E(a, c) == doctest::Approx(2.0));  // disjoint label sets

    Configuration far(1);
    far.insert(Label::root(), {7.0});
    CHECK(d_E(a, far) == doctest::Approx(1.0));  // truncated position cost
}

namespace {

Configuration random_config(RngStream& rng, int max_particles) {
    Configuration e(1);
    int n = 1 + static_cast<int>(rng.u01() * max_particles);
    for (int i = 0; i < n; ++i) {
        // top-level labels drawn from a small pool; duplicates skipped
        Label k({static_cast<std::uint32_t>(1 + rng.u01() * 6)});
        if (!e.contains(k)) e.insert(k, {4.0 * rng.u01() - 2.0});
    }
    return e;
}

}  // namespace

TEST_CASE("d_E metric axioms on random instances") {
    RngStream rng(99, 0, 0, Channel::init, 0);
    for (int trial = 0; trial < 200; ++trial) {
        auto a = random_config(rng, 5);
        auto b = random_config(rng, 5);
        auto c = random_config(rng, 5);
        double ab = d_E(a, b), ba = d_E(b, a), ac = d_E(a, c), cb = d_E(c, b);
        CHECK(ab >= 0.0);
        CHECK(ab == doctest::Approx(ba));
        CHECK(ab <= ac + cb + 1e-12);
        CHECK(d_E(a, a) == 0.0);
        if (ab == 0.0) {
            CHECK(a.size() == b.size());
            for (const auto& [k, x] : a.particles()) CHECK(b.position(k) == x);
        }
    }
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <functional>
#include <numbers>

#include "bmv/metrics.hpp"
#include "bmv/rng.hpp"
#include "bmv/transport.hpp"

using namespace bmv;

namespace {

// Independent oracle: adaptive Simpson, not the library's fixed panels.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double fa,
                        double fm, double fb, double whole, double tol, int depth) {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double oracle_integral(const std::function<double(double)>& f, double a, double b,
                       double tol = 1e-13) {
    // split into unit-ish panels so the recursion sees the oscillation
    double total = 0.0;
    int panels = static_cast<int>(std::ceil((b - a) / 2.0));
    double h = (b - a) / panels;
    for (int p = 0; p < panels; ++p) {
        double lo = a + p * h, hi = lo + h, mid = 0.5 * (lo + hi);
        double flo = f(lo), fmid = f(mid), fhi = f(hi);
        double whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
        total += adaptive_simpson(f, lo, hi, flo, fmid, fhi, whole, tol, 40);
    }
    return total;
}

const LambdaIndex kIdx = LambdaIndex::for_dim(1);
const QuadratureScheme kClosed = QuadratureScheme::closed_form();
const QuadratureScheme kGrid = QuadratureScheme::grid(50.0, 20000);

AtomicMeasure random_measure(RngStream& rng, int max_atoms = 5) {
    int n = 1 + static_cast<int>(rng.u01() * max_atoms);
    if (n > max_atoms) n = max_atoms;
    AtomicMeasure m(1);
    for (int i = 0; i < n; ++i) m.add_atom({6.0 * rng.u01() - 3.0}, 2.0 * rng.u01());
    return m;
}

}  // namespace

TEST_CASE("lambda index rule") {
    CHECK(LambdaIndex::for_dim(1).lambda == 4);   // d mod 4 = 1
    CHECK(LambdaIndex::for_dim(2).lambda == 4);   // d mod 4 = 2 -> floor(1)+3
    CHECK(LambdaIndex::for_dim(3).lambda == 4);
    CHECK(LambdaIndex::for_dim(4).lambda == 6);
    CHECK(LambdaIndex::for_dim(5).lambda == 6);
    CHECK(LambdaIndex::for_dim(8).lambda == 8);
}

TEST_CASE("rho_F of identical measures is zero") {
    auto m = AtomicMeasure::from_1d({{0.4, 1.0}, {-1.0, 0.5}});
    CHECK(rho_F(m, m, kIdx, kClosed).value == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(rho_F(m, m, kIdx, kGrid).value == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("rho_F(d0, 2 d0)^2 = 5/32 against the adaptive oracle") {
    auto d0 = AtomicMeasure::from_1d({{0.0, 1.0}});
    auto d0x2 = AtomicMeasure::from_1d({{0.0, 2.0}});
    double weight_int = oracle_integral(
        [](double n) { return std::pow(1.0 + n * n, -4.0); }, -1e4, 1e4);
    // the oracle integral itself against the analytic value pi 5/16
    CHECK(weight_int == doctest::Approx(std::numbers::pi * 5.0 / 16.0).epsilon(1e-11));

    double sq = rho_F(d0, d0x2, kIdx, kClosed).value;
    sq *= sq;
    CHECK(std::abs(sq - weight_int / (2.0 * std::numbers::pi)) <= 1e-8);
    CHECK(std::abs(sq - 5.0 / 32.0) <= 1e-12);
}

TEST_CASE("rho_F(d0, d1)^2 against the adaptive oracle") {
    auto d0 = AtomicMeasure::from_1d({{0.0, 1.0}});
    auto d1 = AtomicMeasure::from_1d({{1.0, 1.0}});
    double target = oracle_integral(
                        [](double n) { return (1.0 - std::cos(n)) * std::pow(1.0 + n * n, -4.0); },
                        -1e4, 1e4) /
                    std::numbers::pi;
    for (const auto& scheme : {kClosed, kGrid}) {
        double sq = rho_F(d0, d1, kIdx, scheme).value;
        CHECK(std::abs(sq * sq - target) <= 1e-8);
    }
}

TEST_CASE("sobolev identity rho_F^2 = (2pi)^-1 |.|^2") {
    auto d0 = AtomicMeasure::from_1d({{0.0, 1.0}});
    auto d0x2 = AtomicMeasure::from_1d({{0.0, 2.0}});
    double nrm = sobolev_neg_norm(d0, d0x2, kIdx, kGrid).value;
    CHECK(std::abs(nrm * nrm - std::numbers::pi * 5.0 / 16.0) <= 1e-8);

    RngStream rng(7, 0, 0, Channel::init, 0);
    for (int i = 0; i < 30; ++i) {
        auto m1 = random_measure(rng);
        auto m2 = random_measure(rng);
        double rf = rho_F(m1, m2, kIdx, kClosed).value;
        double sb = sobolev_neg_norm(m1, m2, kIdx, kGrid).value;
        CHECK(std::abs(rf * rf - sb * sb / (2.0 * std::numbers::pi)) <= 1e-8);
    }
}

TEST_CASE("error conditions") {
    AtomicMeasure m1(1), m2(2);
    m1.add_atom({0.0}, 1.0);
    m2.add_atom({0.0, 0.0}, 1.0);
    CHECK_THROWS_WITH_AS(rho_F(m1, m2, kIdx, kClosed).value,
                         doctest::Contains("dimension"), std::invalid_argument);
    auto idx2 = LambdaIndex::for_dim(2);
    AtomicMeasure a(2), b(2);
    a.add_atom({0.0, 0.0}, 1.0);
    b.add_atom({1.0, 0.0}, 1.0);
    CHECK_THROWS_WITH_AS(rho_F(a, b, idx2, kClosed).value, doctest::Contains("scheme"),
                         std::invalid_argument);
}

TEST_CASE("metric axioms for rho_F on random instances") {
    RngStream rng(11, 0, 0, Channel::init, 0);
    for (int i = 0; i < 40; ++i) {
        auto a = random_measure(rng);
        auto b = random_measure(rng);
        auto c = random_measure(rng);
        double ab = rho_F(a, b, kIdx, kClosed).value;
        double ba = rho_F(b, a, kIdx, kClosed).value;
        double ac = rho_F(a, c, kIdx, kClosed).value;
        double cb = rho_F(c, b, kIdx, kClosed).value;
        CHECK(ab >= 0.0);
        CHECK(ab == doctest::Approx(ba).epsilon(1e-12));
        CHECK(ab <= ac + cb + 1e-6);
    }
}

TEST_CASE("domination constant and the W1bar comparison") {
    double c = domination_constant(kIdx);
    // independent oracle for the constant
    double integral = oracle_integral(
        [](double n) { return (std::abs(n) + 3.0) * (std::abs(n) + 3.0) *
                              std::pow(1.0 + n * n, -4.0); },
        -1e4, 1e4);
    double oracle_c = std::sqrt(integral / (2.0 * std::numbers::pi));
    CHECK(c == doctest::Approx(oracle_c).epsilon(1e-9));

    auto d0 = AtomicMeasure::from_1d({{0.0, 1.0}});
    auto d0x2 = AtomicMeasure::from_1d({{0.0, 2.0}});
    auto rep = check_domination(d0, d0x2, kIdx, kClosed, {0.0});
    CHECK(rep.w1bar == doctest::Approx(1.0));
    CHECK(rep.rho_f == doctest::Approx(std::sqrt(5.0 / 32.0)));
    CHECK(rep.holds);

    RngStream rng(13, 0, 0, Channel::init, 0);
    for (int i = 0; i < 100; ++i) {
        auto m1 = random_measure(rng);
        auto m2 = random_measure(rng);
        CHECK(check_domination(m1, m2, kIdx, kClosed, {0.0}).holds);
    }
}

TEST_CASE("weak convergence of m_n = d_{1/n} + (1+1/n) d_0 to 2 d_0") {
    auto limit = AtomicMeasure::from_1d({{0.0, 2.0}});
    double prev_rf = 1e300, prev_w1 = 1e300;
    for (int n = 1; n <= 100; ++n) {
        double inv = 1.0 / n;
        auto mn = AtomicMeasure::from_1d({{inv, 1.0}, {0.0, 1.0 + inv}});
        double rf = rho_F(mn, limit, kIdx, kClosed).value;
        double w1 = truncated_w1(mn, limit);
        CHECK(rf <= prev_rf + 1e-12);
        CHECK(w1 <= prev_w1 + 1e-12);
        prev_rf = rf;
        prev_w1 = w1;
    }
    CHECK(prev_rf < 0.02);
    CHECK(prev_w1 < 0.03);
}

TEST_CASE("reported tail bound is honest") {
    auto d0 = AtomicMeasure::from_1d({{0.0, 1.0}});
    auto d1 = AtomicMeasure::from_1d({{1.0, 1.0}});
    auto coarse = rho_F(d0, d1, kIdx, QuadratureScheme::grid(10.0, 5000));
    auto fine = rho_F(d0, d1, kIdx, QuadratureScheme::grid(60.0, 30000));
    CHECK(std::abs(coarse.value * coarse.value - fine.value * fine.value) <=
          coarse.tail_bound + 1e-12);
    CHECK(coarse.tail_bound > 0.0);
}

#include "ksb/testfunction.hpp"

#include <doctest.h>

#include <cmath>
#include <memory>
#include <random>

using namespace ksb;

namespace {

std::shared_ptr<const SignalProfile> profile_for(const ValidatedParams& vp, Breakpoints bp = Breakpoints::consistent) {
    return std::make_shared<const SignalProfile>(vp, Bridge::quintic, bp);
}

TestFunction scenario_tf(double gamma, Breakpoints bp = Breakpoints::consistent) {
    const ValidatedParams vp = validate(SystemParams{});
    return build_testfunction(vp, profile_for(vp, bp), {4.0, 0.8, gamma});
}

struct Tuple {
    ValidatedParams vp;
    TestFnParams tp;
};

// Valid tuple: f0 above threshold, delta above its bound, gamma past both floors.
Tuple random_tuple(std::mt19937_64& rng) {
    std::uniform_real_distribution<> u(0.0, 1.0);
    for (;;) {
        SystemParams p;
        p.n = 3 + int(rng() % 3);
        p.alpha = 2.0 + (p.n - 2.0) * (0.05 + 0.9 * u(rng));
        p.f0 = f0_threshold(p.n, p.alpha) * (1.05 + 4.0 * u(rng));
        p.R = 0.3 + 0.6 * u(rng);
        p.rho = p.R * (0.05 + 0.4 * u(rng));
        const ValidatedParams vp = validate(p);
        if (!(vp.delta_bound < 0.98)) continue;
        const double delta = vp.delta_bound + (1.0 - vp.delta_bound) * (0.05 + 0.9 * u(rng));
        const double xi = 4.0 - (4.0 / p.n) * 0.9 * u(rng);
        const double floor = std::max(4.0, xi) / (p.R - p.rho);
        const double gamma = floor * std::pow(10.0, 0.01 + 3.0 * u(rng));
        return {vp, {xi, delta, gamma}};
    }
}

}  // namespace

TEST_CASE("scenario constants") {
    const TestFunction tf = scenario_tf(20.0);
    // a and b from the two matching conditions at x = xi, solved directly.
    const double e = std::exp(-4.0);
    const double a = e * 4.0 / (0.8 * std::pow(4.0, -0.8));
    const double b = a * std::pow(4.0, -0.8) - e;
    CHECK(tf.a == doctest::Approx(a).epsilon(1e-14));
    CHECK(tf.b == doctest::Approx(b).epsilon(1e-13));
    CHECK(tf.a == doctest::Approx(0.277613172898765).epsilon(1e-13));
    CHECK(tf.b == doctest::Approx(0.0732625555549367).epsilon(1e-13));
    CHECK(tf.c1 == doctest::Approx(12.0 * std::cbrt(4.0)).epsilon(1e-14));
    CHECK(tf.c1 == doctest::Approx(19.04881).epsilon(1e-6));
    CHECK(tf.c2 == doctest::Approx(1.36 * std::pow(4.0, -2.0 / 3.0)).epsilon(1e-13));
    CHECK(tf.k0 == doctest::Approx(0.539716).epsilon(1e-6));
    CHECK(tf.K0 == doctest::Approx(1.54461887961658).epsilon(1e-13));
    CHECK(tf.K0_without_delta == doctest::Approx(1.23935823147101).epsilon(1e-13));
}

TEST_CASE("phi values at the scenario") {
    const TestFunction tf = scenario_tf(20.0);
    CHECK(tf.phi(0.2).value == doctest::Approx(std::exp(-4.0)).epsilon(1e-14));
    CHECK(tf.phi(0.2).value == doctest::Approx(0.0183156).epsilon(1e-5));
    CHECK(tf.phi(0.2).d1 == doctest::Approx(-0.366313).epsilon(1e-5));
    const double inner = tf.a * std::pow(2.0, -0.8) - tf.b;
    CHECK(tf.phi(0.1).value == doctest::Approx(inner).epsilon(1e-14));
    CHECK(tf.phi(0.1).value == doctest::Approx(0.0861843419622227).epsilon(1e-12));
    CHECK_THROWS_AS(tf.phi(0.0), std::domain_error);
}

TEST_CASE("phi derivatives match finite differences") {
    const TestFunction tf = scenario_tf(20.0);
    for (double s : {0.01, 0.05, 0.15, 0.3, 0.5}) {
        const double h = 1e-5 * s;
        const PhiValue p = tf.phi(s);
        CHECK(p.d1 == doctest::Approx((tf.phi(s + h).value - tf.phi(s - h).value) / (2 * h)).epsilon(1e-7));
        CHECK(p.d2 == doctest::Approx((tf.phi(s + h).d1 - tf.phi(s - h).d1) / (2 * h)).epsilon(1e-7));
    }
}

TEST_CASE("continuity, positivity and convexity over random tuples") {
    std::mt19937_64 rng(21);
    for (int k = 0; k < 100; ++k) {
        const Tuple t = random_tuple(rng);
        const TestFunction tf = build_testfunction(t.vp, profile_for(t.vp), t.tp);
        const double sw = tf.switch_point();
        const PhiValue lo = tf.phi(std::nextafter(sw, 0.0));
        const double e = std::exp(-tf.xi);
        CHECK(std::abs(lo.value - e) <= 1e-12 * e);
        CHECK(std::abs(lo.d1 + tf.gamma * e) <= 1e-10 * tf.gamma * e);
        double prev = INFINITY;
        for (int i = 0; i <= 2000; ++i) {
            const double s = 1e-8 * std::pow(1e9 / tf.gamma, i / 2000.0);
            const PhiValue p = tf.phi(s);
            CHECK(p.value > 0.0);
            CHECK(p.value < prev);
            CHECK(p.d2 > 0.0);
            prev = p.value;
        }
    }
}

TEST_CASE("ode inequality at the scenario") {
    const TestFunction tf = scenario_tf(20.0);
    const auto grid = ode_check_grid(tf, 1e-8, 10.0, 10000);
    CHECK(grid.size() > 9900);
    const MarginReport r = verify_ode_inequality(tf, grid);
    CHECK(r.pass);
    CHECK(r.min_margin >= 0.0);
    CHECK(r.s.size() == grid.size());

    // Beyond the outer breakpoint F_s = 0, so L phi/phi has no F_s term.
    const double s = 1.0;
    const double r1 = -tf.gamma;
    CHECK(tf.L_over_phi(s) == doctest::Approx(tf.principal_over_phi(s) - 3.0 * tf.profile->F(s) * r1).epsilon(1e-14));
}

TEST_CASE("principal part just above the switch equals c1 gamma^(2/n)") {
    std::mt19937_64 rng(22);
    int within = 0;
    for (int k = 0; k < 100; ++k) {
        const Tuple t = random_tuple(rng);
        const TestFunction tf = build_testfunction(t.vp, profile_for(t.vp), t.tp);
        const double s = tf.switch_point() * (1.0 + 1e-12);
        const double g = std::pow(tf.gamma, 2.0 / tf.n);
        CHECK(tf.principal_over_phi(s) == doctest::Approx(tf.c1 * g).epsilon(1e-9));
        if (std::abs(tf.principal_over_phi(s) - tf.k0 * g) <= 0.1 * tf.k0 * g) ++within;
        CHECK(tf.L_over_phi(s) >= tf.principal_over_phi(s));
    }
    // The scenario itself has c1 >> c2, so the match is looked for over the sample.
    const ValidatedParams vp = validate(SystemParams{3, 2.5, 60.0, 0.5, 0.1, 1.0});
    const double delta = 0.5 * (vp.delta_bound + 1.0);
    const TestFunction close = build_testfunction(vp, profile_for(vp), {4.0, delta, 100.0});
    MESSAGE("c1 = " << close.c1 << ", c2 = " << close.c2 << ", sampled tuples within 10%: " << within);
    const double g = std::pow(close.gamma, 2.0 / 3.0);
    CHECK(std::abs(close.principal_over_phi(close.switch_point() * (1 + 1e-12)) - close.k0 * g) <= 0.1 * close.k0 * g);
}

TEST_CASE("margin holds for random tuples with literal breakpoints") {
    std::mt19937_64 rng(23);
    for (int k = 0; k < 60; ++k) {
        const Tuple t = random_tuple(rng);
        const TestFunction tf = build_testfunction(t.vp, profile_for(t.vp, Breakpoints::literal), t.tp);
        const MarginReport r = verify_ode_inequality(tf, ode_check_grid(tf, 1e-8, 10.0, 4000));
        CHECK_MESSAGE(r.pass, "min margin " << r.min_margin << " at s = " << r.at_s);
    }
}

TEST_CASE("consistent breakpoints need the inner branch inside the power law") {
    std::mt19937_64 rng(24);
    int tested = 0;
    for (int k = 0; k < 200 && tested < 40; ++k) {
        Tuple t = random_tuple(rng);
        const double inner = std::pow(t.vp.raw.R - t.vp.raw.rho, t.vp.n());
        t.tp.gamma = std::max(t.tp.gamma, 1.01 * t.tp.xi / inner);
        const TestFunction tf = build_testfunction(t.vp, profile_for(t.vp), t.tp);
        const MarginReport r = verify_ode_inequality(tf, ode_check_grid(tf, 1e-8, 10.0, 4000));
        CHECK_MESSAGE(r.pass, "min margin " << r.min_margin << " at s = " << r.at_s);
        ++tested;
    }
    CHECK(tested == 40);
}

TEST_CASE("delta below its bound fails construction") {
    const ValidatedParams vp = validate(SystemParams{});
    CHECK_THROWS_AS(build_testfunction(vp, profile_for(vp), {4.0, 0.6, 20.0}), InfeasibleTestFunction);
    try {
        build_testfunction(vp, profile_for(vp), {4.0, 0.6, 20.0});
    } catch (const InfeasibleTestFunction& e) {
        CHECK(e.c2() < 0.0);
    }
    CHECK_THROWS_AS(build_testfunction(vp, profile_for(vp), {4.0, 0.8, 9.0}), ParameterError);
}

TEST_CASE("integral bound") {
    const TestFunction tf = scenario_tf(20.0);
    const IntegralBoundReport r = verify_integral_bound(tf);
    CHECK(r.holds);
    CHECK(r.outer_numeric == doctest::Approx(std::exp(-4.0) / 400.0).epsilon(1e-8));
    CHECK(r.outer_closed == doctest::Approx(4.57891e-5).epsilon(1e-5));
    CHECK(r.bound == doctest::Approx(0.00386154719904146).epsilon(1e-12));
    CHECK(r.inner_numeric <= r.inner_closed * (1 + 1e-12));
    CHECK(r.bound > r.bound_without_delta);
    CHECK(r.inner_closed > tf.a * std::pow(4.0, 1.2) / (1.2 * 400.0));

    const IntegralBoundReport r2 = verify_integral_bound(scenario_tf(40.0));
    CHECK(r2.bound == doctest::Approx(r.bound / 4.0).epsilon(1e-14));

    std::mt19937_64 rng(25);
    for (int k = 0; k < 50; ++k) {
        const Tuple t = random_tuple(rng);
        const IntegralBoundReport q = verify_integral_bound(build_testfunction(t.vp, profile_for(t.vp), t.tp));
        CHECK(q.holds);
        CHECK(q.outer_numeric == doctest::Approx(q.outer_closed).epsilon(1e-8));
    }
}

TEST_CASE("closed-form integrals of phi") {
    const TestFunction tf = scenario_tf(20.0);
    // Midpoint sums in u = s^(1/5) remove the s^-delta singularity.
    const auto sum = [&](double hi, bool moment) {
        const int m = 400000;
        const double uh = std::pow(hi, 0.2) / m;
        double acc = 0.0;
        for (int i = 0; i < m; ++i) {
            const double u = (i + 0.5) * uh;
            const double s = std::pow(u, 5.0);
            acc += tf.phi(s).value * (moment ? s : 1.0) * 5.0 * std::pow(u, 4.0) * uh;
        }
        return acc;
    };
    for (double hi : {0.05, 0.2, 0.7, 3.0}) {
        CHECK(tf.antiderivative(hi) == doctest::Approx(sum(hi, false)).epsilon(1e-7));
        CHECK(tf.first_moment_antiderivative(hi) == doctest::Approx(sum(hi, true)).epsilon(1e-7));
    }
    CHECK(tf.integral() == doctest::Approx(tf.antiderivative(50.0)).epsilon(1e-13));
}

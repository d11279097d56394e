#include "ksb/quadrature.hpp"
#include "ksb/signal.hpp"

#include <doctest.h>

#include <cmath>

using namespace ksb;

namespace {

const SignalProfile& scenario() {
    static const SignalProfile p(3, 2.0, 2.5, 0.5, 0.1);
    return p;
}

}  // namespace

TEST_CASE("f on the power law, bridge and outside") {
    const auto& p = scenario();
    CHECK(p.f(0.2) == doctest::Approx(2.0 * std::pow(0.2, -2.5)).epsilon(1e-14));
    CHECK(p.f(0.2) == doctest::Approx(111.8034).epsilon(1e-6));
    CHECK(p.f(0.7) == 0.0);
    CHECK(p.f(0.5) == doctest::Approx(2.0 * std::pow(0.5, -2.5) * 0.5).epsilon(1e-12));
    CHECK(p.f(0.5) == doctest::Approx(5.656854).epsilon(1e-6));
}

TEST_CASE("f is non-increasing on a dense grid") {
    for (Bridge b : {Bridge::quintic, Bridge::exponential}) {
        const SignalProfile p(3, 2.0, 2.5, 0.5, 0.1, b);
        double prev = p.f(1e-4);
        for (int i = 2; i <= 20000; ++i) {
            const double r = 1e-4 * i;
            const double v = p.f(r);
            CHECK(v - prev <= 1e-12 * std::max(1.0, prev));
            prev = v;
        }
    }
}

TEST_CASE("F values") {
    const auto& p = scenario();
    CHECK(p.F(0.001) == doctest::Approx(4.0 * std::pow(0.001, 1.0 / 6.0)).epsilon(1e-12));
    CHECK(p.F(0.001) == doctest::Approx(1.264911).epsilon(1e-6));
    CHECK(p.F(0.216) == p.F(0.5));
    CHECK(p.F(0.3) == p.F(3.0));
    CHECK(p.F_upper_bound() == doctest::Approx(4.0 * std::sqrt(0.6)).epsilon(1e-14));
    CHECK(p.F_upper_bound() == doctest::Approx(3.098387).epsilon(1e-6));
    CHECK(p.F_max() <= p.F_upper_bound());
    const SignalProfile l(3, 2.0, 2.5, 0.5, 0.1, Bridge::quintic, Breakpoints::literal);
    CHECK(l.F_upper_bound() == doctest::Approx(4.0 * std::pow(0.6, 1.0 / 6.0)).epsilon(1e-14));
    CHECK(l.F_max() <= l.F_upper_bound());
    const SignalProfile e(3, 2.0, 2.5, 0.5, 0.1, Bridge::exponential);
    CHECK(e.F_max() <= e.F_upper_bound());
    CHECK(e.F(0.1) == doctest::Approx(e.F_direct(0.1)).epsilon(1e-10));
}

TEST_CASE("F through the bridge matches an independent trapezoid sum") {
    // F(s) = 4 (R-rho)^(1/2) + int_{R-rho}^{s^(1/3)} f(r) r^2 dr for s in the bridge.
    const auto& p = scenario();
    for (double s : {0.07, 0.1, 0.15, 0.2, 0.216}) {
        const double r1 = std::cbrt(s);
        const int m = 200000;
        const double h = (r1 - 0.4) / m;
        double sum = 0.0;
        for (int i = 0; i <= m; ++i) {
            const double r = 0.4 + i * h;
            sum += (i == 0 || i == m ? 0.5 : 1.0) * p.f(r) * r * r;
        }
        const double expect = 4.0 * std::sqrt(0.4) + h * sum;
        CHECK(p.F(s) == doctest::Approx(expect).epsilon(1e-9));
        CHECK(p.F_direct(s) == doctest::Approx(expect).epsilon(1e-9));
    }
}

TEST_CASE("Fs values") {
    const auto& p = scenario();
    CHECK(p.Fs(0.001) == doctest::Approx(2.0 / 3.0 * std::pow(0.001, -5.0 / 6.0)).epsilon(1e-13));
    CHECK(p.Fs(0.001) == doctest::Approx(210.8185).epsilon(1e-6));
    CHECK(p.Fs(0.3) == 0.0);
    CHECK(p.Fs(0.008) == doctest::Approx(p.f(0.2) / 3.0).epsilon(1e-13));
    CHECK(p.Fs(0.008) == doctest::Approx(37.26780).epsilon(1e-6));
}

TEST_CASE("F non-decreasing, Fs non-increasing, F' matches Fs") {
    for (Breakpoints bp : {Breakpoints::consistent, Breakpoints::literal}) {
        const SignalProfile p(3, 2.0, 2.5, 0.5, 0.1, Bridge::quintic, bp);
        double pf = p.F(1e-6), ps = p.Fs(1e-6);
        for (int i = 1; i <= 4000; ++i) {
            const double s = 1e-6 * std::pow(1e6, i / 4000.0);
            const double f = p.F(s), fs = p.Fs(s);
            CHECK(f >= pf);
            CHECK(fs <= ps);
            pf = f;
            ps = fs;
            const double h = 1e-5 * s;
            const bool near = std::abs(s - p.s_inner()) < 10 * h || std::abs(s - p.s_outer()) < 10 * h;
            if (!near && fs > 0.0) {
                const double fd = (p.F(s + h) - p.F(s - h)) / (2 * h);
                CHECK(fd == doctest::Approx(fs).epsilon(1e-6));
            }
        }
    }
}

TEST_CASE("breakpoint modes") {
    const SignalProfile c(3, 2.0, 2.5, 0.5, 0.1);
    CHECK(c.s_inner() == doctest::Approx(0.064).epsilon(1e-14));
    CHECK(c.s_outer() == doctest::Approx(0.216).epsilon(1e-14));
    const SignalProfile l(3, 2.0, 2.5, 0.5, 0.1, Bridge::quintic, Breakpoints::literal);
    CHECK(l.s_inner() == doctest::Approx(0.4).epsilon(1e-14));
    CHECK(l.s_outer() == doctest::Approx(0.6).epsilon(1e-14));
    CHECK(c.uses_table());
    CHECK(l.uses_table());
}

TEST_CASE("cutoff values and derivative bounds") {
    const Cutoff chi(0.01);
    const auto half = chi(0.005), one = chi(0.01), mid = chi(0.0075);
    CHECK(half.value == 0.0);
    CHECK(half.d1 == 0.0);
    CHECK(half.d2 == 0.0);
    CHECK(one.value == 1.0);
    CHECK(one.d1 == 0.0);
    CHECK(one.d2 == 0.0);
    CHECK(mid.value == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(Cutoff::sup_d1() == doctest::Approx(3.75));
    CHECK(Cutoff::sup_d2() == doctest::Approx(40.0 / std::sqrt(3.0)).epsilon(1e-14));
    CHECK(Cutoff::c_chi() == doctest::Approx(26.84401).epsilon(1e-6));

    // Dense scan of the profile's derivatives, rescaled to eps = 1.
    double m1 = 0, m2 = 0;
    const Cutoff c5(0.5);
    for (int i = 0; i <= 200000; ++i) {
        const auto v = c5(0.25 + 0.25 * i / 200000.0);
        m1 = std::max(m1, std::abs(v.d1) * 0.5);
        m2 = std::max(m2, std::abs(v.d2) * 0.25);
    }
    CHECK(m1 == doctest::Approx(3.75).epsilon(1e-8));
    CHECK(m2 == doctest::Approx(40.0 / std::sqrt(3.0)).epsilon(1e-6));

    for (double eps : {1e-1, 1e-2, 1e-3}) {
        const Cutoff c(eps);
        for (int i = 0; i <= 10000; ++i) {
            const double s = 2.0 * eps * i / 10000.0;
            const auto v = c(s);
            CHECK(v.value >= 0.0);
            CHECK(v.value <= 1.0);
            CHECK(std::abs(v.d1) <= Cutoff::c_chi() / eps * (1 + 1e-12));
            CHECK(std::abs(v.d2) <= Cutoff::c_chi() / (eps * eps) * (1 + 1e-12));
        }
    }
}

TEST_CASE("quadrature wrappers") {
    const auto r = integrate([](double x) { return std::exp(-x); }, 0.0, INFINITY, 1e-12);
    CHECK(r.value == doctest::Approx(1.0).epsilon(1e-12));
    const auto s = integrate_singular([](double x) { return std::pow(x, -0.5); }, 0.0, 1e-6, 1e-10);
    CHECK(s.value == doctest::Approx(2e-3).epsilon(1e-10));
    const auto t = integrate([](double x) { return x * x; }, 1.0, 1.0 + 1e-9, 1e-12);
    CHECK(t.value == doctest::Approx(1e-9).epsilon(1e-8));
}

#include "ksb/testfunction.hpp"

#include "ksb/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ksb {

double TestFunction::rate() const { return k0 * std::pow(gamma, 2.0 / n); }

PhiValue TestFunction::phi(double s) const {
    if (!(s > 0.0)) throw std::domain_error("phi is defined for s > 0");
    if (s < switch_point()) {
        const double x = gamma * s;
        const double p = a * std::pow(x, -delta);
        return {p - b, -delta * gamma * p / x, delta * (delta + 1.0) * gamma * gamma * p / (x * x)};
    }
    const double e = std::exp(-gamma * s);
    return {e, -gamma * e, gamma * gamma * e};
}

namespace {

struct Ratios {
    double r1, r2;  // phi_s/phi, phi_ss/phi
};

Ratios ratios(const TestFunction& tf, double s) {
    if (s < tf.switch_point()) {
        const double x = tf.gamma * s;
        const double p = tf.a * std::pow(x, -tf.delta);
        const double v = p - tf.b;
        return {-tf.delta * tf.gamma * p / (x * v), tf.delta * (tf.delta + 1.0) * tf.gamma * tf.gamma * p / (x * x * v)};
    }
    return {-tf.gamma, tf.gamma * tf.gamma};
}

}  // namespace

double TestFunction::principal_over_phi(double s) const {
    if (!(s > 0.0)) throw std::domain_error("L phi is defined for s > 0");
    const double nn = n;
    const Ratios r = ratios(*this, s);
    return nn * nn * std::pow(s, (2.0 * nn - 2.0) / nn) * r.r2 + 4.0 * (nn * nn - nn) * std::pow(s, (nn - 2.0) / nn) * r.r1;
}

double TestFunction::L_over_phi(double s) const {
    const Ratios r = ratios(*this, s);
    return principal_over_phi(s) - n * profile->F(s) * r.r1 - n * profile->Fs(s);
}

double TestFunction::margin(double s) const { return L_over_phi(s) - rate(); }

double TestFunction::energy_density(double s) const {
    const PhiValue p = phi(s);
    if (s < switch_point()) {
        const double x = gamma * s;
        const double ratio = p.value * x / (delta * gamma * a * std::pow(x, -delta));
        return p.value * ratio;
    }
    return p.value / gamma;
}

double TestFunction::integral() const {
    return a * std::pow(xi, 1.0 - delta) / ((1.0 - delta) * gamma) - b * xi / gamma + std::exp(-xi) / gamma;
}

double TestFunction::antiderivative(double s) const {
    const double sw = switch_point();
    const double inner = [&](double t) {
        return a * std::pow(gamma, -delta) * std::pow(t, 1.0 - delta) / (1.0 - delta) - b * t;
    }(std::min(s, sw));
    if (s <= sw) return inner;
    return inner + (std::exp(-xi) - std::exp(-gamma * s)) / gamma;
}

double TestFunction::first_moment_antiderivative(double s) const {
    const double sw = switch_point();
    const double t = std::min(s, sw);
    const double inner = a * std::pow(gamma, -delta) * std::pow(t, 2.0 - delta) / (2.0 - delta) - 0.5 * b * t * t;
    if (s <= sw) return inner;
    const auto prim = [&](double u) { return -std::exp(-gamma * u) * (u / gamma + 1.0 / (gamma * gamma)); };
    return inner + prim(s) - prim(sw);
}

TestFunction build_testfunction(const ValidatedParams& params, std::shared_ptr<const SignalProfile> profile,
                                const TestFnParams& tp) {
    if (!profile) throw std::invalid_argument("signal profile is required");
    const int n = params.n();
    const double alpha = params.raw.alpha, f0 = params.raw.f0;

    TestFunction tf;
    tf.n = n;
    tf.alpha = alpha;
    tf.f0 = f0;
    tf.R = params.raw.R;
    tf.rho = params.raw.rho;
    tf.xi = tp.xi;
    tf.delta = tp.delta;
    tf.gamma = tp.gamma;
    tf.profile = std::move(profile);

    const double nn = n;
    tf.c2 = delta_quadratic(n, alpha, f0, tp.delta) * std::pow(tp.xi, -2.0 / nn);
    if (!(tf.c2 > 0.0))
        throw InfeasibleTestFunction("delta = " + std::to_string(tp.delta) + " does not exceed the lower bound " +
                                         std::to_string(params.delta_bound) + "; inner constant c2 <= 0",
                                     tf.c2);
    if (auto issues = check(params, tp); !issues.empty()) throw ParameterError(std::move(issues));

    const double exi = std::exp(-tp.xi);
    tf.a = std::pow(tp.xi, tp.delta + 1.0) / tp.delta * exi;
    tf.b = (tp.xi / tp.delta - 1.0) * exi;
    tf.c1 = (nn * nn * tp.xi - 4.0 * (nn * nn - nn)) * std::pow(tp.xi, (nn - 2.0) / nn);
    tf.k0 = std::min(tf.c1, tf.c2);
    const double core = tf.a * std::pow(tp.xi, 2.0 - tp.delta) / (2.0 - tp.delta);
    tf.K0 = core / tp.delta + exi;
    tf.K0_without_delta = core + exi;
    return tf;
}

std::vector<double> ode_check_grid(const TestFunction& tf, double lo, double hi, std::size_t count) {
    if (!(lo > 0.0) || !(hi > lo) || count < 2) throw std::invalid_argument("grid needs 0 < lo < hi and count >= 2");
    const double step = std::log(hi / lo) / double(count - 1);
    const double kinks[] = {tf.switch_point(), tf.profile->s_inner(), tf.profile->s_outer()};
    std::vector<double> grid;
    grid.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const double s = (i + 1 == count) ? hi : lo * std::exp(step * double(i));
        const double h = s * std::expm1(step);
        const bool near = std::any_of(std::begin(kinks), std::end(kinks),
                                      [&](double k) { return std::abs(s - k) < h; });
        if (!near) grid.push_back(s);
    }
    return grid;
}

MarginReport verify_ode_inequality(const TestFunction& tf, std::span<const double> grid, double tolerance) {
    MarginReport rep;
    rep.tolerance = tolerance;
    rep.min_margin = std::numeric_limits<double>::infinity();
    rep.s.assign(grid.begin(), grid.end());
    rep.margin.reserve(grid.size());
    for (double s : grid) {
        const double m = tf.margin(s);
        rep.margin.push_back(m);
        if (!(m >= rep.min_margin)) {
            rep.min_margin = m;
            rep.at_s = s;
        }
    }
    rep.pass = !grid.empty() && rep.min_margin >= -tolerance;
    return rep;
}

IntegralBoundReport verify_integral_bound(const TestFunction& tf) {
    IntegralBoundReport rep;
    const double sw = tf.switch_point();
    const auto f = [&](double s) { return s > 0.0 ? tf.energy_density(s) : 0.0; };
    rep.inner_numeric = integrate_singular(f, 0.0, sw, 1e-12).value;
    // s = sw + u/gamma puts the exponential tail on a unit scale.
    const auto tail = [&](double u) { return tf.energy_density(sw + u / tf.gamma) / tf.gamma; };
    rep.outer_numeric = integrate(tail, 0.0, std::numeric_limits<double>::infinity(), 1e-12).value;
    rep.numeric = rep.inner_numeric + rep.outer_numeric;
    const double g2 = tf.gamma * tf.gamma;
    rep.inner_closed = tf.a * std::pow(tf.xi, 2.0 - tf.delta) / (tf.delta * (2.0 - tf.delta) * g2);
    rep.outer_closed = std::exp(-tf.xi) / g2;
    rep.bound = tf.K0 / g2;
    rep.bound_without_delta = tf.K0_without_delta / g2;
    rep.holds = rep.numeric <= rep.bound;
    return rep;
}

}  // namespace ksb

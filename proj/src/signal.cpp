#include "ksb/signal.hpp"

#include "ksb/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ksb {

namespace {

constexpr std::size_t kTableSize = 2048;
constexpr double kTableCheckTol = 1e-11;

double bump_psi(double x) { return x > 0.0 ? std::exp(-1.0 / x) : 0.0; }

double exp_smoothstep(double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double a = bump_psi(x);
    const double b = bump_psi(1.0 - x);
    return a / (a + b);
}

}  // namespace

double smoothstep(double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    return x * x * x * (10.0 + x * (-15.0 + 6.0 * x));
}

double smoothstep_d1(double x) {
    if (x <= 0.0 || x >= 1.0) return 0.0;
    const double y = x * (1.0 - x);
    return 30.0 * y * y;
}

double smoothstep_d2(double x) {
    if (x <= 0.0 || x >= 1.0) return 0.0;
    return 60.0 * x * (1.0 - x) * (1.0 - 2.0 * x);
}

SignalProfile::SignalProfile(int n, double f0, double alpha, double R, double rho, Bridge bridge,
                             Breakpoints breakpoints)
    : n_(n), f0_(f0), alpha_(alpha), R_(R), rho_(rho), bridge_(bridge), breakpoints_(breakpoints) {
    auto issues = check(SystemParams{n, alpha, f0, R, rho, 1.0});
    if (!issues.empty()) throw ParameterError(std::move(issues));

    if (breakpoints_ == Breakpoints::consistent) {
        r_lo_ = R - rho;
        r_hi_ = R + rho;
    } else {
        r_lo_ = std::pow(R - rho, 1.0 / n);
        r_hi_ = std::pow(R + rho, 1.0 / n);
    }
    s_lo_ = std::pow(r_lo_, n);
    s_hi_ = std::pow(r_hi_, n);
    if (breakpoints_ == Breakpoints::literal) {
        s_lo_ = R - rho;
        s_hi_ = R + rho;
    }
    F_lo_ = power_F(s_lo_);
    F_max_ = F_lo_ + bridge_integral(r_lo_, r_hi_);
    build_table();
}

SignalProfile::SignalProfile(const ValidatedParams& vp, Bridge bridge, Breakpoints breakpoints)
    : SignalProfile(vp.raw.n, vp.raw.f0, vp.raw.alpha, vp.raw.R, vp.raw.rho, bridge, breakpoints) {}

double SignalProfile::bridge_shape(double x) const {
    return bridge_ == Bridge::quintic ? smoothstep(x) : exp_smoothstep(x);
}

double SignalProfile::f(double r) const {
    if (!(r > 0.0)) throw std::domain_error("f: radius must be positive");
    if (r <= r_lo_) return f0_ * std::pow(r, -alpha_);
    if (r >= r_hi_) return 0.0;
    return f0_ * std::pow(r, -alpha_) * bridge_shape((r_hi_ - r) / (r_hi_ - r_lo_));
}

double SignalProfile::power_F(double s) const {
    return f0_ / (n_ - alpha_) * std::pow(s, (n_ - alpha_) / n_);
}

double SignalProfile::bridge_integral(double r_from, double r_to) const {
    const int n = n_;
    // Near r_hi the integrand can vanish faster than any power, so the
    // relative target is backed by a floor tied to the size of F.
    const double floor = 1e-15 * f0_ / (n_ - alpha_) * std::pow(r_hi_, n_ - alpha_);
    return integrate([this, n](double r) { return f(r) * std::pow(r, n - 1); }, r_from, r_to, 1e-10, floor).value;
}

void SignalProfile::build_table() {
    table_s_.resize(kTableSize);
    table_F_.resize(kTableSize);
    table_dF_.resize(kTableSize);
    const double log_lo = std::log(s_lo_);
    const double step = (std::log(s_hi_) - log_lo) / double(kTableSize - 1);
    for (std::size_t k = 0; k < kTableSize; ++k) table_s_[k] = std::exp(log_lo + step * double(k));
    table_s_.front() = s_lo_;
    table_s_.back() = s_hi_;

    table_F_[0] = F_lo_;
    for (std::size_t k = 1; k < kTableSize; ++k) {
        const double ra = std::pow(table_s_[k - 1], 1.0 / n_);
        const double rb = std::pow(table_s_[k], 1.0 / n_);
        table_F_[k] = table_F_[k - 1] + bridge_integral(ra, rb);
    }
    table_F_.back() = F_max_;
    for (std::size_t k = 0; k < kTableSize; ++k) table_dF_[k] = Fs(table_s_[k]);

    // Fritsch-Carlson slope limiting keeps the interpolant monotone.
    for (std::size_t k = 0; k + 1 < kTableSize; ++k) {
        const double h = table_s_[k + 1] - table_s_[k];
        const double secant = (table_F_[k + 1] - table_F_[k]) / h;
        if (secant <= 0.0) {
            table_dF_[k] = table_dF_[k + 1] = 0.0;
            continue;
        }
        const double a = table_dF_[k] / secant;
        const double b = table_dF_[k + 1] / secant;
        const double norm = a * a + b * b;
        if (norm > 9.0) {
            const double tau = 3.0 / std::sqrt(norm);
            table_dF_[k] = tau * a * secant;
            table_dF_[k + 1] = tau * b * secant;
        }
    }

    for (std::size_t k = 0; k + 1 < kTableSize; ++k) {
        const double mid = 0.5 * (table_s_[k] + table_s_[k + 1]);
        const double exact = table_F_[k] + bridge_integral(std::pow(table_s_[k], 1.0 / n_), std::pow(mid, 1.0 / n_));
        const double interp = F(mid);
        if (std::abs(interp - exact) > kTableCheckTol * F_max_) {
            direct_ = true;
            break;
        }
    }
}

double SignalProfile::F(double s) const {
    if (s < 0.0) throw std::domain_error("F: s must be nonnegative");
    if (s <= s_lo_) return power_F(s);
    if (s >= s_hi_) return F_max_;
    if (direct_) return F_direct(s);

    const double step = std::log(table_s_[1] / table_s_[0]);
    std::size_t k = std::size_t(std::log(s / s_lo_) / step);
    k = std::min(k, kTableSize - 2);
    while (k > 0 && s < table_s_[k]) --k;
    while (k + 2 < kTableSize && s > table_s_[k + 1]) ++k;

    const double h = table_s_[k + 1] - table_s_[k];
    const double t = (s - table_s_[k]) / h;
    const double t2 = t * t, t3 = t2 * t;
    const double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t;
    const double h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
    return h00 * table_F_[k] + h10 * h * table_dF_[k] + h01 * table_F_[k + 1] + h11 * h * table_dF_[k + 1];
}

double SignalProfile::F_direct(double s) const {
    if (s < 0.0) throw std::domain_error("F: s must be nonnegative");
    if (s <= s_lo_) return power_F(s);
    if (s >= s_hi_) return F_max_;
    return F_lo_ + bridge_integral(r_lo_, std::pow(s, 1.0 / n_));
}

double SignalProfile::Fs(double s) const {
    if (!(s > 0.0)) throw std::domain_error("F_s: s must be positive");
    if (breakpoints_ == Breakpoints::literal) {
        // s^(1/n) may round across r_lo/r_hi; pin the exact breakpoints.
        if (s <= s_lo_) return f0_ / n_ * std::pow(s, -alpha_ / n_);
        if (s >= s_hi_) return 0.0;
    }
    return f(std::pow(s, 1.0 / n_)) / n_;
}

double SignalProfile::F_upper_bound() const noexcept {
    return f0_ / (n_ - alpha_) * std::pow(r_hi_, n_ - alpha_);
}

Cutoff::Cutoff(double epsilon) : eps_(epsilon) {
    if (!(epsilon > 0.0 && epsilon < 1.0))
        throw ParameterError(ParameterIssue{"epsilon", epsilon, "(0, 1)", "epsilon must lie in (0, 1)"});
}

double Cutoff::value(double s) const { return smoothstep(2.0 * s / eps_ - 1.0); }

CutoffValue Cutoff::operator()(double s) const {
    const double x = 2.0 * s / eps_ - 1.0;
    return {smoothstep(x), 2.0 / eps_ * smoothstep_d1(x), 4.0 / (eps_ * eps_) * smoothstep_d2(x)};
}

double Cutoff::sup_d1() { return 2.0 * smoothstep_d1(0.5); }

double Cutoff::sup_d2() {
    // S''' = 60(1 - 6x + 6x^2) vanishes at x = (3 - sqrt 3)/6, where S'' = 10/sqrt 3.
    return 4.0 * 10.0 / std::sqrt(3.0);
}

double Cutoff::c_chi() { return sup_d1() + sup_d2(); }

}  // namespace ksb

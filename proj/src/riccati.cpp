#include "ksb/riccati.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ksb {

Riccati::Riccati(double A, double B, double y1, double t1) : A_(A), B_(B), y1_(y1), t1_(t1) {
    if (!(A > 0.0) || !(B >= 0.0) || !(y1 > 0.0) || !std::isfinite(t1))
        throw std::invalid_argument("Riccati comparison needs A > 0, B >= 0, y1 > 0");
    T_ = B == 0.0 ? std::numeric_limits<double>::infinity() : std::log1p(A / (B * y1)) / A;
}

double Riccati::operator()(double t) const {
    if (t < t1_) throw std::domain_error("z is defined from t1 on");
    const double tau = t - t1_;
    if (!(tau < T_))
        throw BeyondBlowup("t - t1 = " + std::to_string(tau) + " is past the blow-up time " + std::to_string(T_), T_);
    if (B_ == 0.0) return y1_ * std::exp(A_ * tau);
    const double q = B_ / A_;
    const double denom = (1.0 / y1_ + q) * std::exp(-A_ * tau) - q;
    if (!(denom > 0.0)) throw BeyondBlowup("z is not finite at t", T_);
    return 1.0 / denom;
}

PiecewiseLinear::PiecewiseLinear(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
    if (x_.size() < 2 || x_.size() != y_.size()) throw std::invalid_argument("need at least two knots");
    for (std::size_t i = 1; i < x_.size(); ++i) {
        if (!(x_[i] > x_[i - 1])) throw std::invalid_argument("knots must increase strictly");
        if (y_[i] < y_[i - 1]) throw std::invalid_argument("map must be non-decreasing");
    }
}

double PiecewiseLinear::operator()(double v) const {
    std::size_t i = std::upper_bound(x_.begin(), x_.end(), v) - x_.begin();
    i = std::clamp<std::size_t>(i, 1, x_.size() - 1);
    const double w = (v - x_[i - 1]) / (x_[i] - x_[i - 1]);
    return y_[i - 1] + w * (y_[i] - y_[i - 1]);
}

double rk4(const ScalarMap& Phi, double t0, double v0, double t1, std::size_t steps) {
    if (steps == 0) throw std::invalid_argument("rk4 needs at least one step");
    const double h = (t1 - t0) / double(steps);
    double v = v0;
    for (std::size_t k = 0; k < steps; ++k) {
        const double k1 = Phi(v);
        const double k2 = Phi(v + 0.5 * h * k1);
        const double k3 = Phi(v + 0.5 * h * k2);
        const double k4 = Phi(v + h * k3);
        v += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!std::isfinite(v)) return std::numeric_limits<double>::infinity();
    }
    return v;
}

GronwallReport gronwall_compare(std::span<const double> t, std::span<const double> y, const ScalarMap& Phi,
                                double c, double t1, double tol, std::size_t substeps) {
    if (t.size() != y.size()) throw std::invalid_argument("time and value samples differ in length");
    if (!std::is_sorted(t.begin(), t.end())) throw std::invalid_argument("samples must be sorted in time");
    GronwallReport rep;
    rep.z.assign(t.size(), std::numeric_limits<double>::quiet_NaN());
    double tz = t1, z = c;
    for (std::size_t k = 0; k < t.size(); ++k) {
        if (t[k] < t1) continue;
        if (std::isfinite(z) && t[k] > tz) {
            z = rk4(Phi, tz, z, t[k], substeps);
            tz = t[k];
        }
        rep.z[k] = z;
        if (!std::isfinite(z)) continue;
        ++rep.compared;
        const double m = y[k] - z;
        rep.worst_margin = std::min(rep.worst_margin, m);
        if (m < -tol && rep.ok) {
            rep.ok = false;
            rep.first_failure = k;
        }
    }
    return rep;
}

}  // namespace ksb

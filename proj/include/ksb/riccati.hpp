#pragma once

#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

namespace ksb {

/// Thrown when z is requested at or beyond its blow-up time.
class BeyondBlowup : public std::domain_error {
public:
    BeyondBlowup(const std::string& what, double blowup_time) : std::domain_error(what), T_(blowup_time) {}
    double blowup_time() const noexcept { return T_; }

private:
    double T_;
};

/// Solution of z' = A z + B z^2, z(t1) = y1 with A > 0, B >= 0, y1 > 0:
///
///     z(t) = 1 / ((1/y1 + B/A) e^{-A(t - t1)} - B/A),
///
/// finite on [t1, t1 + T) with T = log(1 + A/(B y1)) / A (infinite when B = 0).
class Riccati {
public:
    Riccati(double A, double B, double y1, double t1);

    double operator()(double t) const;
    /// Length T of the existence interval after t1.
    double blowup_time() const noexcept { return T_; }
    double A() const noexcept { return A_; }
    double B() const noexcept { return B_; }
    double y1() const noexcept { return y1_; }
    double t1() const noexcept { return t1_; }

private:
    double A_, B_, y1_, t1_, T_;
};

/// Non-decreasing piecewise-linear map, extended linearly beyond the end knots.
class PiecewiseLinear {
public:
    PiecewiseLinear(std::vector<double> x, std::vector<double> y);
    double operator()(double v) const;

private:
    std::vector<double> x_, y_;
};

using ScalarMap = std::function<double(double)>;

/// Classical fourth-order Runge-Kutta for v' = Phi(v) from (t0, v0) to t1 in
/// `steps` equal steps. Stops early and returns +inf once v is not finite.
double rk4(const ScalarMap& Phi, double t0, double v0, double t1, std::size_t steps);

struct GronwallReport {
    bool ok = true;
    double worst_margin = std::numeric_limits<double>::infinity();  ///< min of y - z
    std::size_t first_failure = std::numeric_limits<std::size_t>::max();
    std::vector<double> z;  ///< comparison solution at each sample; +inf past its blow-up
    std::size_t compared = 0;
};

/// Integrates z' = Phi(z), z(t1) = c and checks y(t_k) >= z(t_k) - tol at each
/// sample with t_k >= t1. Samples must be sorted in time. Samples where z has
/// already blown up are not compared.
GronwallReport gronwall_compare(std::span<const double> t, std::span<const double> y, const ScalarMap& Phi,
                                double c, double t1, double tol, std::size_t substeps = 64);

}  // namespace ksb

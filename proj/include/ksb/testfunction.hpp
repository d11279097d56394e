#pragma once

#include "ksb/params.hpp"
#include "ksb/signal.hpp"

#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

namespace ksb {

class InfeasibleTestFunction : public std::domain_error {
public:
    InfeasibleTestFunction(const std::string& what, double c2) : std::domain_error(what), c2_(c2) {}
    double c2() const noexcept { return c2_; }

private:
    double c2_;
};

struct PhiValue {
    double value = 0.0;
    double d1 = 0.0;
    double d2 = 0.0;
};

/// The two-branch weight
///
///     phi(s) = a (gamma s)^-delta - b   for s <  xi/gamma,
///     phi(s) = exp(-gamma s)            for s >= xi/gamma,
///
/// with a = xi^(delta+1)/delta e^-xi and b = (xi/delta - 1) e^-xi chosen so
/// that phi and phi_s are continuous at the switch. It satisfies
/// L phi >= k0 gamma^(2/n) phi, where
///
///     L phi = n^2 s^((2n-2)/n) phi_ss + 4(n^2-n) s^((n-2)/n) phi_s - nF phi_s - nF_s phi,
///
/// and int phi^2/|phi_s| <= K0/gamma^2.
struct TestFunction {
    int n = 3;
    double alpha = 0.0, f0 = 0.0, R = 0.0, rho = 0.0;
    double xi = 4.0, delta = 0.0, gamma = 0.0;
    double a = 0.0, b = 0.0;
    double c1 = 0.0;  ///< outer-branch constant (n^2 xi - 4(n^2-n)) xi^((n-2)/n)
    double c2 = 0.0;  ///< inner-branch constant (delta quadratic) xi^(-2/n)
    double k0 = 0.0;  ///< min{c1, c2}
    double K0 = 0.0;  ///< a xi^(2-delta)/(delta(2-delta)) + e^-xi
    /// Same expression without the 1/delta factor. Kept for reporting only:
    /// for delta < 1 it falls below the bound on the inner integral.
    double K0_without_delta = 0.0;
    std::shared_ptr<const SignalProfile> profile;

    double switch_point() const noexcept { return xi / gamma; }
    /// k0 gamma^(2/n), the exponential rate certified by the inequality.
    double rate() const;

    PhiValue phi(double s) const;
    /// L phi / phi, evaluated without forming phi (which underflows for large gamma s).
    double L_over_phi(double s) const;
    /// The diffusion and drift part of L phi / phi, i.e. without the two F terms.
    /// Just above xi/gamma it equals c1 gamma^(2/n).
    double principal_over_phi(double s) const;
    /// (L phi - k0 gamma^(2/n) phi) / phi.
    double margin(double s) const;
    /// phi^2/|phi_s|, computed as phi * (phi/|phi_s|).
    double energy_density(double s) const;

    /// int_0^inf phi ds in closed form.
    double integral() const;
    /// Antiderivatives of phi and s*phi, continuous across the switch, zero at s = 0.
    double antiderivative(double s) const;
    double first_moment_antiderivative(double s) const;
};

/// Builds phi for gamma and the given (xi, delta). Throws InfeasibleTestFunction
/// when c2 <= 0 (delta at or below the lower bound) and ParameterError for
/// other out-of-range parameters such as gamma <= 4/(R - rho).
TestFunction build_testfunction(const ValidatedParams& params, std::shared_ptr<const SignalProfile> profile,
                                const TestFnParams& tp);

struct MarginReport {
    bool pass = false;
    double min_margin = 0.0;
    double at_s = 0.0;
    double tolerance = 1e-9;
    std::vector<double> s;
    std::vector<double> margin;
};

/// Log-spaced grid on [lo, hi] without the points closer than one local
/// spacing to xi/gamma and to the bridge breakpoints.
std::vector<double> ode_check_grid(const TestFunction& tf, double lo, double hi, std::size_t count);

/// min over the grid of margin(s); pass iff >= -tolerance.
MarginReport verify_ode_inequality(const TestFunction& tf, std::span<const double> grid, double tolerance = 1e-9);

struct IntegralBoundReport {
    double numeric = 0.0;      ///< quadrature of phi^2/|phi_s| over (0, inf)
    double inner_numeric = 0.0;
    double outer_numeric = 0.0;
    double inner_closed = 0.0;  ///< a xi^(2-delta)/(delta(2-delta) gamma^2), bounds inner_numeric
    double outer_closed = 0.0;  ///< e^-xi / gamma^2
    double bound = 0.0;         ///< K0 / gamma^2
    double bound_without_delta = 0.0;
    bool holds = false;
};

IntegralBoundReport verify_integral_bound(const TestFunction& tf);

}  // namespace ksb

#pragma once

#include <functional>
#include <stdexcept>

namespace ksb {

class QuadratureError : public std::runtime_error {
public:
    QuadratureError(const std::string& what, double achieved, double requested)
        : std::runtime_error(what), achieved_(achieved), requested_(requested) {}
    double achieved() const noexcept { return achieved_; }
    double requested() const noexcept { return requested_; }

private:
    double achieved_;
    double requested_;
};

struct QuadResult {
    double value = 0.0;
    double error = 0.0;  ///< estimated absolute error
    double l1 = 0.0;     ///< integral of |f|
};

using Integrand = std::function<double(double)>;

/// Adaptive Gauss-Kronrod (7/15) with interval bisection. `b` may be +inf.
/// Throws QuadratureError when the estimated error exceeds
/// max(rel_tol * L1, abs_tol).
QuadResult integrate(const Integrand& f, double a, double b, double rel_tol = 1e-10, double abs_tol = 0.0);

/// Double-exponential rule for integrands with integrable endpoint
/// singularities such as r^(n-1-alpha) at r = 0.
QuadResult integrate_singular(const Integrand& f, double a, double b, double rel_tol = 1e-10);

}  // namespace ksb

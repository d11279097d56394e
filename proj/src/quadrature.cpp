#include "ksb/quadrature.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace ksb {

namespace {

constexpr unsigned kMaxDepth = 15;

void check_accuracy(const char* rule, const QuadResult& r, double a, double b, double rel_tol, double abs_tol = 0.0) {
    const double allowed = std::max(rel_tol * r.l1, abs_tol) + 1e-300;
    if (!std::isfinite(r.value) || r.error > allowed) {
        std::ostringstream os;
        os << rule << " on [" << a << ", " << b << "] reached relative error "
           << (r.l1 > 0 ? r.error / r.l1 : r.error) << ", requested " << rel_tol;
        throw QuadratureError(os.str(), r.l1 > 0 ? r.error / r.l1 : r.error, rel_tol);
    }
}

}  // namespace

QuadResult integrate(const Integrand& f, double a, double b, double rel_tol, double abs_tol) {
    if (a == b) return {};
    using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
    QuadResult r;
    if (std::isfinite(a) && std::isfinite(b)) {
        // The rule's error floor is absolute, so short intervals are mapped to [0, 1].
        const double h = b - a;
        r.value = GK::integrate([&](double u) { return f(a + h * u); }, 0.0, 1.0, kMaxDepth, rel_tol, &r.error, &r.l1);
        r.value *= h;
        r.error *= std::abs(h);
        r.l1 *= std::abs(h);
    } else {
        r.value = GK::integrate(f, a, b, kMaxDepth, rel_tol, &r.error, &r.l1);
    }
    check_accuracy("gauss-kronrod", r, a, b, rel_tol, abs_tol);
    return r;
}

QuadResult integrate_singular(const Integrand& f, double a, double b, double rel_tol) {
    if (a == b) return {};
    static thread_local boost::math::quadrature::tanh_sinh<double> rule;
    QuadResult r;
    std::size_t levels = 0;
    if (std::isfinite(a) && std::isfinite(b)) {
        const double h = b - a;
        // Endpoint-relative arguments keep the singular end resolved after mapping.
        r.value = rule.integrate([&](double u, double uc) { return f(u < 0.5 ? a + h * u : b - h * uc); }, 0.0, 1.0,
                                 rel_tol, &r.error, &r.l1, &levels);
        r.value *= h;
        r.error *= std::abs(h);
        r.l1 *= std::abs(h);
    } else {
        r.value = rule.integrate(f, a, b, rel_tol, &r.error, &r.l1, &levels);
    }
    check_accuracy("tanh-sinh", r, a, b, rel_tol);
    return r;
}

}  // namespace ksb

#include "ksb/params.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace ksb {

namespace {

std::string summarize(const std::vector<ParameterIssue>& issues) {
    std::ostringstream os;
    os << "invalid parameters:";
    for (const auto& i : issues) os << " [" << i.field << "=" << i.value << ": " << i.message << "]";
    return os.str();
}

void require_dimension(int n, double alpha) {
    std::vector<ParameterIssue> issues;
    if (n < 3) issues.push_back({"n", double(n), "n >= 3", "n must be at least 3"});
    if (!(alpha > 2.0)) issues.push_back({"alpha", alpha, "(2, n)", "alpha must exceed 2"});
    if (!(alpha < double(n))) issues.push_back({"alpha", alpha, "(2, n)", "alpha must be < n"});
    if (!issues.empty()) throw ParameterError(std::move(issues));
}

void require_f0(double f0) {
    if (!(f0 > 0.0)) throw ParameterError(ParameterIssue{"f0", f0, "(0, inf)", "f0 must be positive"});
}

}  // namespace

ParameterError::ParameterError(std::vector<ParameterIssue> issues)
    : std::invalid_argument(summarize(issues)), issues_(std::move(issues)) {}

ParameterError::ParameterError(ParameterIssue issue)
    : ParameterError(std::vector<ParameterIssue>{std::move(issue)}) {}

double unit_sphere_area(int n) {
    // |S_{n-1}| = 2 pi^{n/2} / Gamma(n/2)
    const double half = 0.5 * n;
    return 2.0 * std::pow(std::numbers::pi, half) / std::tgamma(half);
}

double f0_threshold(int n, double alpha) {
    require_dimension(n, alpha);
    return 2.0 * n / alpha * (n - 2) * (n - alpha);
}

double h_value(int n, double alpha, double f0) {
    require_dimension(n, alpha);
    require_f0(f0);
    return (n - alpha) * (3.0 * n - 4.0) - f0;
}

double delta_quadratic(int n, double alpha, double f0, double delta) {
    const double nn = n;
    return nn * nn * delta * delta + (nn * f0 / (nn - alpha) - 3.0 * nn * nn + 4.0 * nn) * delta - f0;
}

double delta_quadratic_root(int n, double alpha, double f0) {
    const double h = h_value(n, alpha, f0);
    const double m = n - alpha;
    const double disc = std::sqrt(h * h + 4.0 * f0 * m * m);
    // For h < 0 the textbook form cancels; use the product of the roots instead.
    if (h >= 0.0) return (h + disc) / (2.0 * n * m);
    return 2.0 * f0 * m / (n * (disc - h));
}

double delta_lower_bound(int n, double alpha, double f0) {
    const double root = delta_quadratic_root(n, alpha, f0);
    return std::max((n - alpha) / n, root);
}

std::vector<ParameterIssue> check(const SystemParams& p) {
    std::vector<ParameterIssue> out;
    if (p.n < 3) out.push_back({"n", double(p.n), "n >= 3", "n must be at least 3"});
    if (!(p.alpha > 2.0)) out.push_back({"alpha", p.alpha, "(2, n)", "alpha must exceed 2"});
    if (!(p.alpha < double(p.n))) out.push_back({"alpha", p.alpha, "(2, n)", "alpha must be < n"});
    if (!(p.f0 > 0.0)) out.push_back({"f0", p.f0, "(0, inf)", "f0 must be positive"});
    if (!(p.R > 0.0 && p.R < 1.0)) out.push_back({"R", p.R, "(0, 1)", "R must lie in (0, 1)"});
    if (!(p.rho > 0.0)) out.push_back({"rho", p.rho, "(0, R/2)", "rho must be positive"});
    if (!(p.rho < 0.5 * p.R)) out.push_back({"rho", p.rho, "(0, R/2)", "rho must be < R/2"});
    if (!(p.c0 > 0.0)) out.push_back({"c0", p.c0, "(0, inf)", "c0 must be positive"});
    for (double v : {p.alpha, p.f0, p.R, p.rho, p.c0}) {
        if (!std::isfinite(v)) {
            out.push_back({"parameters", v, "finite", "all parameters must be finite"});
            break;
        }
    }
    return out;
}

ValidatedParams validate(const SystemParams& p) {
    auto issues = check(p);
    if (!issues.empty()) throw ParameterError(std::move(issues));

    ValidatedParams vp;
    vp.raw = p;
    vp.sphere_area = unit_sphere_area(p.n);
    vp.mu = p.c0 * vp.sphere_area / p.n;
    vp.mass_cap = p.n * vp.mu / vp.sphere_area;
    vp.threshold = f0_threshold(p.n, p.alpha);
    vp.delta_bound = delta_lower_bound(p.n, p.alpha, p.f0);
    vp.feasible = p.f0 > vp.threshold;
    return vp;
}

std::vector<ParameterIssue> check(const ValidatedParams& vp, const TestFnParams& tp) {
    std::vector<ParameterIssue> out;
    const int n = vp.n();
    const double lo_xi = 4.0 - 4.0 / n;
    if (!(tp.xi > lo_xi && tp.xi <= 4.0))
        out.push_back({"xi", tp.xi, "(4 - 4/n, 4]", "xi must lie in (4 - 4/n, 4]"});
    if (!(tp.delta > 0.0 && tp.delta < 1.0))
        out.push_back({"delta", tp.delta, "(0, 1)", "delta must lie in (0, 1)"});
    else if (!(tp.delta > vp.delta_bound))
        out.push_back({"delta", tp.delta, "(delta_lower_bound, 1)",
                       "delta must exceed delta_lower_bound = " + std::to_string(vp.delta_bound)});
    const double inner = vp.raw.R - vp.raw.rho;
    if (!(tp.gamma > 4.0 / inner))
        out.push_back({"gamma", tp.gamma, "(4/(R-rho), inf)", "gamma must exceed 4/(R-rho)"});
    else if (!(inner * tp.gamma > tp.xi))
        out.push_back({"gamma", tp.gamma, "(xi/(R-rho), inf)", "(R-rho)*gamma must exceed xi"});
    return out;
}

TestFnParams default_testfn_params(const ValidatedParams& vp, double gamma) {
    return TestFnParams{4.0, 0.5 * (vp.delta_bound + 1.0), gamma};
}

}  // namespace ksb

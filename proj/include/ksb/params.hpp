#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace ksb {

/// One violated parameter constraint.
struct ParameterIssue {
    std::string field;
    double value = 0.0;
    std::string admissible;
    std::string message;
};

class ParameterError : public std::invalid_argument {
public:
    explicit ParameterError(std::vector<ParameterIssue> issues);
    explicit ParameterError(ParameterIssue issue);

    const std::vector<ParameterIssue>& issues() const noexcept { return issues_; }

private:
    std::vector<ParameterIssue> issues_;
};

/// Model parameters of the radial Keller-Segel problem with power-law signal
/// production f0 * r^-alpha, cut off between R - rho and R + rho. The initial
/// density is the plateau c0 on the closed unit ball.
struct SystemParams {
    int n = 3;
    double alpha = 2.5;
    double f0 = 2.0;
    double R = 0.5;
    double rho = 0.1;
    double c0 = 1.0;
};

/// SystemParams after all checks, annotated with the derived quantities.
struct ValidatedParams {
    SystemParams raw;
    double mu = 0.0;           ///< total cell mass, c0 * |B_1|
    double sphere_area = 0.0;  ///< |S_{n-1}|
    double mass_cap = 0.0;     ///< n * mu / |S_{n-1}|, the far-field value of W
    double threshold = 0.0;    ///< (2n/alpha)(n-2)(n-alpha)
    double delta_bound = 0.0;  ///< delta_lower_bound(n, alpha, f0)
    bool feasible = false;     ///< f0 > threshold

    int n() const noexcept { return raw.n; }
};

struct TestFnParams {
    double xi = 4.0;
    double delta = 0.0;
    double gamma = 0.0;
};

/// Surface measure of the unit sphere in R^n.
double unit_sphere_area(int n);

/// Critical amplitude (2n/alpha)(n-2)(n-alpha); blow-up is shown above it.
double f0_threshold(int n, double alpha);

/// h(n, alpha, f0) = (n - alpha)(3n - 4) - f0.
double h_value(int n, double alpha, double f0);

/// Left side of n^2 d^2 + (n f0/(n-alpha) - 3n^2 + 4n) d - f0; its sign decides
/// whether the inner-branch constant of the test function is positive.
double delta_quadratic(int n, double alpha, double f0, double delta);

/// Larger root of delta_quadratic, evaluated without cancellation.
double delta_quadratic_root(int n, double alpha, double f0);

/// max{(n - alpha)/n, larger root}. Strictly below 1 iff f0 > f0_threshold.
double delta_lower_bound(int n, double alpha, double f0);

/// Collects every violated invariant instead of stopping at the first.
std::vector<ParameterIssue> check(const SystemParams& p);

/// Throws ParameterError listing all violations. Infeasibility (f0 at or
/// below the threshold) is not an error; it is reported through `feasible`.
ValidatedParams validate(const SystemParams& p);

std::vector<ParameterIssue> check(const ValidatedParams& vp, const TestFnParams& tp);

/// Midpoint of (delta_lower_bound, 1) with xi = 4 and the given gamma.
TestFnParams default_testfn_params(const ValidatedParams& vp, double gamma);

}  // namespace ksb

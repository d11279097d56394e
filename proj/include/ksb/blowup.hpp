#pragma once

#include "ksb/riccati.hpp"
#include "ksb/solver.hpp"
#include "ksb/testfunction.hpp"

#include <functional>
#include <string>
#include <vector>

namespace ksb {

class SelectionError : public std::runtime_error {
public:
    SelectionError(const std::string& what, std::string inequality)
        : std::runtime_error(what), inequality_(std::move(inequality)) {}
    const std::string& inequality() const noexcept { return inequality_; }

private:
    std::string inequality_;
};

struct SelectionInput {
    double t0 = 0.0;
    double eta = 0.1;
    double c0 = 1.0;
    double c_sub = 0.0;
    double gamma_cap = 1152921504606846976.0;  // 2^60
};

/// Outcome of the (kappa, s0, gamma) search. Every inequality is stored with
/// both sides in log form so large exponents do not overflow.
struct Selection {
    double kappa = 0.0;
    double s0 = 0.0;
    double s0_bound = 0.0;      ///< upper bound on s0 from the monotonicity of s^3 sinh
    double gamma = 0.0;
    double gamma_floor_support = 0.0;  ///< 4/(R - rho)
    double gamma_floor_kappa = 0.0;    ///< (xi/kappa)^(n/2)
    unsigned doublings = 0;
    double probe_s = 0.0;       ///< kappa gamma^((2-n)/n)
    double probe_t = 0.0;       ///< t0 + eta/2
    double probe_W = 0.0;       ///< measured W^eps(probe_s, probe_t), standing in for the proper solution
    double s0_log_lhs = 0.0, s0_log_rhs = 0.0;        ///< log(k0 K0/kappa) <= log(c0 c_sub s0^3 sinh(...))
    double growth_log_lhs = 0.0, growth_log_rhs = 0.0;  ///< log(1 + 2k0K0 e^{kappa g^(2/n)}/(W g^((n-2)/n))) <= 2 kappa g^(2/n)
    bool s0_ok = false;
    bool probe_ok = false;      ///< s0 > probe_s
    bool growth_ok = false;
};

using ProbeW = std::function<double(double s)>;

/// kappa = k0 eta/8; s0 is the largest value below the s0 bound satisfying the
/// sinh inequality (found by bisection in log s); gamma starts at the larger
/// floor and doubles until s0 > kappa gamma^((2-n)/n) and the growth
/// inequality holds for W = probe(kappa gamma^((2-n)/n)). Throws
/// SelectionError past gamma_cap.
Selection select_blowup_params(const SelectionInput& in, const TestFunction& seed, const ProbeW& probe);

/// log sinh(x) for x > 0 without overflow.
double log_sinh(double x);

struct YReport {
    std::vector<double> t;
    std::vector<double> y;
    double phi_integral = 0.0;
    double cap_bound = 0.0;  ///< mass cap times the integral of phi
    bool cap_ok = false;
    double t1 = 0.0;
    double y1 = 0.0;
    double c_gamma = 0.0;
    double lower_bound = 0.0;  ///< (c_gamma/gamma) e^{-kappa gamma^(2/n)}
    bool lower_ok = false;
    double riccati_A = 0.0, riccati_B = 0.0, riccati_T = 0.0;
    std::vector<double> z;  ///< +inf or NaN outside [t1, t1 + T)
    bool riccati_ok = false;
    double riccati_worst = 0.0;
    std::size_t riccati_compared = 0;
};

/// y(t) = int phi W ds for every snapshot. W is linear between nodes and
/// equals the mass cap beyond s_max; the cell integrals use the closed-form
/// antiderivatives of phi and s phi, so they are exact for that interpolant.
double y_value(const MassFunction& w, const TestFunction& tf, double cap);

/// Computes y over the trajectory, its cap and lower bound at t1, and the
/// comparison with the Riccati solution started from y(t1). Throws
/// std::out_of_range if the trajectory ends before t1.
YReport y_functional(const Trajectory& traj, const TestFunction& tf, double cap, double kappa, double t1,
                     double tol_rel = 1e-6);

struct IndicatorRow {
    double t = 0.0;
    std::vector<double> ratio;  ///< sup_{s <= s_max/2} W/s^beta per beta
    double lipschitz = 0.0;     ///< max forward-difference slope
    double atom = 0.0;          ///< |S| W(0+)/n
};

struct RunIndicators {
    double epsilon = 0.0;
    std::size_t mesh_N = 0;
    double s_max = 0.0;
    std::vector<IndicatorRow> rows;
    std::vector<double> sup_ratio;  ///< over rows, per beta
    double sup_lipschitz = 0.0;
    double sup_atom = 0.0;
};

/// atom_scale is |S_{n-1}|/n, turning W(0+) into the mass of the origin atom.
RunIndicators blowup_indicator(const Trajectory& traj, const std::vector<double>& betas, double atom_scale);

/// Indicator row for one snapshot.
IndicatorRow indicator_row(const MassFunction& w, const std::vector<double>& betas, double s_max, double atom_scale);

struct BlowupReport {
    std::vector<double> betas;
    std::vector<RunIndicators> runs;
    /// True iff every per-beta sup and the Lipschitz estimate are non-decreasing
    /// as epsilon decreases (finite-eps trend, not a proof of blow-up).
    bool indicator_trend = false;
    double lipschitz_factor = 0.0;  ///< last run's Lipschitz estimate over the first run's at trend_time
    double trend_time = 0.0;
    bool has_selection = false;
    Selection selection;
    bool has_y = false;
    YReport y;
    TestFunction tf;
};

/// Fills indicator_trend and lipschitz_factor; runs must be ordered by decreasing epsilon.
void assess_trend(BlowupReport& report, double trend_time);

/// JSON text of the report; doubles are written in shortest round-trip form.
std::string to_json(const BlowupReport& report);

}  // namespace ksb

#pragma once

#include "ksb/mesh.hpp"
#include "ksb/params.hpp"
#include "ksb/signal.hpp"
#include "ksb/transform.hpp"

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace ksb {

enum class AdvectionScheme {
    upwind,  ///< first-order, differences taken from the right
    minmod,  ///< second-order correction with minmod-limited slopes
};

enum class StepControl {
    adaptive,  ///< dt from the advection CFL of the current state, every step
    uniform,   ///< one dt bounded with W <= mass cap; shared by sweep runs
};

struct SolverConfig {
    double epsilon = 1e-2;
    double dt = 1e-3;  ///< initial and maximal step
    double t_end = 0.05;
    AdvectionScheme scheme = AdvectionScheme::upwind;
    StepControl step_control = StepControl::adaptive;
    double cfl_safety = 0.4;
    /// Cutoff used to bound the uniform step; must not exceed epsilon.
    std::optional<double> cfl_epsilon;
    /// Snapshot times in (0, t_end]; t = 0 and t_end are always stored.
    std::vector<double> output_times;
    /// Radius of supp u0; the truncation needs s_max >= 4 support^n.
    double support_radius = 1.0;
    double dt_min = 1e-14;
    double cap_tol = 1e-10;       ///< relative slack on W <= mass cap
    double monotone_tol = 1e-10;  ///< relative slack on W_{i+1} >= W_i
};

struct InvariantViolation {
    std::string kind;
    double t = 0.0;
    double s = 0.0;
    double magnitude = 0.0;
};

struct DtHistory {
    std::size_t steps = 0;
    double min = std::numeric_limits<double>::infinity();
    double max = 0.0;
    /// dt of every 2^k-th step (k = 0, 1, 2, ...), a compact trace for manifests.
    std::vector<std::pair<std::size_t, double>> trace;

    void record(double dt);
};

/// Snapshots of one regularized run.
struct Trajectory {
    double epsilon = 0.0;
    Mesh mesh;
    std::vector<MassFunction> snapshots;
    DtHistory dt;
    double wall_seconds = 0.0;
    std::vector<InvariantViolation> violations;

    /// Snapshot stored at exactly time t; throws if absent.
    const MassFunction& at_time(double t) const;
    std::vector<double> times() const;
};

class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, std::optional<InvariantViolation> v = std::nullopt)
        : std::runtime_error(what), violation_(std::move(v)) {}
    const std::optional<InvariantViolation>& violation() const noexcept { return violation_; }

private:
    std::optional<InvariantViolation> violation_;
};

/// Checks config against the mesh; throws ParameterError.
void check_config(const SolverConfig& config, const Mesh& mesh);

/// Largest stable step of the explicit advection part for state W.
double cfl_step(const ValidatedParams& params, const SignalProfile& profile, const Mesh& mesh,
                const Cutoff& cutoff, std::span<const double> W, double cfl_safety);

/// Step bound valid for every state 0 <= W <= mass cap.
double uniform_step(const ValidatedParams& params, const SignalProfile& profile, const Mesh& mesh,
                    const Cutoff& cutoff, double cfl_safety);

/// Solves W_t = n^2 s^((2n-2)/n) W_ss + chi_eps (W + n F) W_s with W(0) = 0 and
/// W(s_max) = mass cap. Diffusion is backward Euler (one tridiagonal solve per
/// step), transport is explicit and upwinded from the right because its speed
/// chi_eps (W + nF) is nonnegative. Throws SolverError on step underflow or
/// when a bound or monotonicity check fails beyond tolerance.
Trajectory solve_regularized(const ValidatedParams& params, const SignalProfile& profile, const Mesh& mesh,
                             const MassFunction& W0, const SolverConfig& config);

struct SweepRun {
    double epsilon = 0.0;
    std::optional<Trajectory> trajectory;
    std::string error;
};

struct MonotonicityReport {
    bool ok = true;
    double max_violation = 0.0;  ///< max of W^{eps_k} - W^{eps_{k+1}} over shared times
    double at_s = 0.0;
    double at_t = 0.0;
    double eps_coarse = 0.0;
    double eps_fine = 0.0;
    std::size_t comparisons = 0;
    double tolerance = 0.0;
};

struct SweepResult {
    std::vector<SweepRun> runs;
    MonotonicityReport report;
};

/// Runs each epsilon (strictly decreasing, in (0,1)) on the shared mesh with a
/// common uniform step schedule, then checks W^eps increases as eps decreases.
/// A failing run is recorded and the others continue.
SweepResult proper_sweep(const ValidatedParams& params, const SignalProfile& profile, const Mesh& mesh,
                         const MassFunction& W0, const SolverConfig& config, const std::vector<double>& eps_list,
                         unsigned threads = 1, double tolerance_rel = 1e-6);

MonotonicityReport epsilon_monotonicity(const std::vector<const Trajectory*>& runs, double cap, double tolerance_rel);

enum class ComparisonKind { sub, super };

struct ComparisonReport {
    bool ok = true;
    double worst_margin = std::numeric_limits<double>::infinity();
    double at_s = 0.0;
    double at_t = 0.0;
    std::size_t points = 0;
};

using SpaceTimeFunction = std::function<double(double s, double t)>;

/// For kind = sub checks W >= candidate - tol at every node with s <= s_hi and
/// snapshot with t <= t_hi; for super the reverse. Margins are W - candidate
/// (sub) or candidate - W (super); the worst one is reported.
ComparisonReport comparison_check(const Trajectory& traj, const SpaceTimeFunction& candidate, ComparisonKind kind,
                                  double tol, double s_hi = std::numeric_limits<double>::infinity(),
                                  double t_hi = std::numeric_limits<double>::infinity());

/// min{1, min over snapshots with t <= t_hi of W(1/2, t) / W0(1)}.
double estimate_c_sub(const Trajectory& traj, const MassFunction& W0, double t_hi);

/// (s, t) -> c_sub s^2 W0(s), the time-independent subsolution on [0, 1].
SpaceTimeFunction make_subsolution(double c_sub, const MassFunction& W0);

}  // namespace ksb

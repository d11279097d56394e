#include "ksb/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>
#include <mutex>
#include <sstream>
#include <thread>

namespace ksb {

namespace {

double minmod(double a, double b) {
    if (a * b <= 0.0) return 0.0;
    return std::abs(a) < std::abs(b) ? a : b;
}

/// Coefficients that do not change between steps.
struct Frozen {
    std::vector<double> h;    // h[i] = s[i+1] - s[i]
    std::vector<double> nF;   // n F(s_i)
    std::vector<double> D;    // n^2 s_i^((2n-2)/n)
    std::vector<double> chi;  // chi_eps(s_i)
};

Frozen freeze(const ValidatedParams& params, const SignalProfile& profile, const Mesh& mesh, const Cutoff& cutoff) {
    const auto& s = mesh.nodes;
    const std::size_t N = mesh.N();
    const int n = params.n();
    const double p = (2.0 * n - 2.0) / n;
    Frozen fr;
    fr.h.resize(N);
    fr.nF.resize(N + 1);
    fr.D.resize(N + 1);
    fr.chi.resize(N + 1);
    for (std::size_t i = 0; i < N; ++i) fr.h[i] = s[i + 1] - s[i];
    for (std::size_t i = 0; i <= N; ++i) {
        fr.nF[i] = n * profile.F(s[i]);
        fr.D[i] = double(n) * n * std::pow(s[i], p);
        fr.chi[i] = cutoff.value(s[i]);
    }
    return fr;
}

double step_bound(const Frozen& fr, std::span<const double> chi, std::span<const double> W, double cap,
                  bool use_cap, double safety) {
    double dt = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i + 1 < W.size(); ++i) {
        const double speed = chi[i] * ((use_cap ? cap : W[i]) + fr.nF[i]);
        if (speed > 0.0) dt = std::min(dt, fr.h[i] / speed);
    }
    return safety * dt;
}

/// Thomas algorithm for the interior rows; rows 0 and N are Dirichlet.
void implicit_diffusion(const Frozen& fr, double dt, std::vector<double>& W, std::vector<double>& cprime,
                        std::vector<double>& dprime) {
    const std::size_t N = W.size() - 1;
    // Row i: -a W_{i-1} + (1 + a + c) W_i - c W_{i+1} = rhs_i
    cprime[0] = 0.0;
    dprime[0] = W[0];
    for (std::size_t i = 1; i < N; ++i) {
        const double hl = fr.h[i - 1], hr = fr.h[i];
        const double k = 2.0 * dt * fr.D[i] / (hl + hr);
        const double a = k / hl, c = k / hr;
        const double denom = (1.0 + a + c) + a * cprime[i - 1];
        cprime[i] = -c / denom;
        dprime[i] = (W[i] + a * dprime[i - 1]) / denom;
    }
    // W[N] stays the Dirichlet value.
    for (std::size_t i = N - 1; i >= 1; --i) W[i] = dprime[i] - cprime[i] * W[i + 1];
}

std::optional<InvariantViolation> inspect(std::span<const double> s, std::span<const double> W, double t, double cap,
                                          const SolverConfig& cfg) {
    for (std::size_t i = 0; i < W.size(); ++i) {
        if (!std::isfinite(W[i])) return InvariantViolation{"non-finite", t, s[i], W[i]};
        if (W[i] < -cfg.monotone_tol * cap) return InvariantViolation{"negative", t, s[i], W[i]};
        if (W[i] > cap * (1.0 + cfg.cap_tol)) return InvariantViolation{"mass-cap", t, s[i], W[i] - cap};
        if (i + 1 < W.size() && W[i + 1] - W[i] < -cfg.monotone_tol * cap)
            return InvariantViolation{"monotonicity", t, s[i], W[i + 1] - W[i]};
    }
    return std::nullopt;
}

std::vector<double> normalized_times(const SolverConfig& cfg) {
    std::vector<double> out;
    for (double t : cfg.output_times)
        if (t > 0.0 && t < cfg.t_end) out.push_back(t);
    out.push_back(cfg.t_end);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

}  // namespace

void DtHistory::record(double dt) {
    ++steps;
    min = std::min(min, dt);
    max = std::max(max, dt);
    if ((steps & (steps - 1)) == 0) trace.emplace_back(steps, dt);
}

const MassFunction& Trajectory::at_time(double t) const {
    for (const auto& snap : snapshots)
        if (snap.t == t) return snap;
    std::ostringstream os;
    os << "no snapshot at t=" << t;
    throw std::out_of_range(os.str());
}

std::vector<double> Trajectory::times() const {
    std::vector<double> out;
    out.reserve(snapshots.size());
    for (const auto& s : snapshots) out.push_back(s.t);
    return out;
}

void check_config(const SolverConfig& config, const Mesh& mesh) {
    std::vector<ParameterIssue> issues;
    if (!(config.epsilon > 0.0 && config.epsilon < 1.0))
        issues.push_back({"epsilon", config.epsilon, "(0, 1)", "epsilon must lie in (0, 1)"});
    if (!(config.t_end > 0.0) || !std::isfinite(config.t_end))
        issues.push_back({"t_end", config.t_end, "(0, inf)", "t_end must be positive"});
    if (!(config.dt > 0.0)) issues.push_back({"dt", config.dt, "(0, inf)", "dt must be positive"});
    if (!(config.cfl_safety > 0.0 && config.cfl_safety < 1.0))
        issues.push_back({"cfl_safety", config.cfl_safety, "(0, 1)", "cfl_safety must lie in (0, 1)"});
    if (mesh.N() < 2) {
        issues.push_back({"mesh", double(mesh.N()), "N >= 64", "mesh is empty"});
    } else {
        if (config.epsilon < 2.0 * mesh.first_spacing())
            issues.push_back({"epsilon", config.epsilon, ">= 2 s_1", "epsilon must be at least twice the first mesh spacing"});
    }
    if (config.cfl_epsilon && !(*config.cfl_epsilon > 0.0 && *config.cfl_epsilon <= config.epsilon))
        issues.push_back({"cfl_epsilon", *config.cfl_epsilon, "(0, epsilon]", "cfl_epsilon must lie in (0, epsilon]"});
    if (!issues.empty()) throw ParameterError(std::move(issues));
}

double cfl_step(const ValidatedParams& params, const SignalProfile& profile, const Mesh& mesh, const Cutoff& cutoff,
                std::span<const double> W, double cfl_safety) {
    const Frozen fr = freeze(params, profile, mesh, cutoff);
    return step_bound(fr, fr.chi, W, params.mass_cap, false, cfl_safety);
}

double uniform_step(const ValidatedParams& params, const SignalProfile& profile, const Mesh& mesh,
                    const Cutoff& cutoff, double cfl_safety) {
    const Frozen fr = freeze(params, profile, mesh, cutoff);
    return step_bound(fr, fr.chi, mesh.nodes, params.mass_cap, true, cfl_safety);
}

Trajectory solve_regularized(const ValidatedParams& params, const SignalProfile& profile, const Mesh& mesh,
                             const MassFunction& W0, const SolverConfig& config) {
    check_config(config, mesh);
    const double support_n = std::pow(config.support_radius, params.n());
    if (mesh.s_max < 4.0 * support_n) {
        throw ParameterError(ParameterIssue{"s_max", mesh.s_max, ">= 4 support^n",
                                            "truncation s_max must be at least 4 (support radius)^n"});
    }
    if (W0.s != mesh.nodes) throw std::invalid_argument("solve_regularized: W0 is not sampled on the mesh");
    if (profile.n() != params.n()) throw std::invalid_argument("solve_regularized: profile dimension mismatch");

    const auto start = std::chrono::steady_clock::now();
    const Cutoff cutoff(config.epsilon);
    const Frozen fr = freeze(params, profile, mesh, cutoff);
    const double cap = params.mass_cap;
    const std::size_t N = mesh.N();
    const double safety = config.scheme == AdvectionScheme::minmod ? 0.5 * config.cfl_safety : config.cfl_safety;

    double dt_uniform = 0.0;
    if (config.step_control == StepControl::uniform) {
        const Cutoff bound_cut(config.cfl_epsilon.value_or(config.epsilon));
        const Frozen bound = freeze(params, profile, mesh, bound_cut);
        dt_uniform = std::min(config.dt, step_bound(bound, bound.chi, mesh.nodes, cap, true, safety));
    }

    Trajectory traj;
    traj.epsilon = config.epsilon;
    traj.mesh = mesh;

    std::vector<double> W = W0.W;
    W.front() = 0.0;
    W.back() = cap;
    {
        MassFunction snap{mesh.nodes, W, 0.0, cap, std::nullopt};
        traj.snapshots.push_back(std::move(snap));
    }

    std::vector<double> next(N + 1), cprime(N + 1), dprime(N + 1), adv(N + 1), slope(N + 1);
    const std::vector<double> outputs = normalized_times(config);
    std::size_t next_out = 0;
    double t = 0.0;

    while (next_out < outputs.size()) {
        const double target = outputs[next_out];
        double dt = config.step_control == StepControl::uniform
                        ? dt_uniform
                        : std::min(config.dt, step_bound(fr, fr.chi, W, cap, false, safety));
        bool lands = false;
        if (t + dt >= target - 1e-12 * std::max(1.0, target)) {
            dt = target - t;
            lands = true;
        }
        if (!(dt >= config.dt_min)) {
            std::ostringstream os;
            os << "time step underflow at t=" << t << " (dt=" << dt << ")";
            throw SolverError(os.str());
        }

        // Explicit transport, upwinded from the right.
        for (std::size_t i = 1; i < N; ++i) {
            const double speed = fr.chi[i] * (W[i] + fr.nF[i]);
            double ws = (W[i + 1] - W[i]) / fr.h[i];
            if (config.scheme == AdvectionScheme::minmod) {
                auto limited = [&](std::size_t k) {
                    if (k == 0 || k >= N) return 0.0;
                    return minmod((W[k] - W[k - 1]) / fr.h[k - 1], (W[k + 1] - W[k]) / fr.h[k]);
                };
                ws -= 0.5 * (limited(i + 1) - limited(i));
            }
            adv[i] = speed * ws;
        }
        next = W;
        for (std::size_t i = 1; i < N; ++i) next[i] = W[i] + dt * adv[i];
        next.front() = 0.0;
        next.back() = cap;

        implicit_diffusion(fr, dt, next, cprime, dprime);
        W.swap(next);
        t = lands ? target : t + dt;
        traj.dt.record(dt);

        if (auto v = inspect(mesh.nodes, W, t, cap, config)) {
            traj.violations.push_back(*v);
            std::ostringstream os;
            os << "invariant '" << v->kind << "' violated at s=" << v->s << ", t=" << v->t << " (" << v->magnitude
               << ")";
            throw SolverError(os.str(), v);
        }

        if (lands) {
            traj.snapshots.push_back(MassFunction{mesh.nodes, W, t, cap, std::nullopt});
            ++next_out;
        }
    }

    traj.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return traj;
}

MonotonicityReport epsilon_monotonicity(const std::vector<const Trajectory*>& runs, double cap, double tolerance_rel) {
    MonotonicityReport rep;
    rep.tolerance = tolerance_rel * cap;
    for (std::size_t k = 0; k + 1 < runs.size(); ++k) {
        const Trajectory& coarse = *runs[k];
        const Trajectory& fine = *runs[k + 1];
        for (const auto& snap : coarse.snapshots) {
            const MassFunction* other = nullptr;
            for (const auto& f : fine.snapshots)
                if (f.t == snap.t) other = &f;
            if (!other || other->s != snap.s) continue;
            ++rep.comparisons;
            for (std::size_t i = 0; i < snap.size(); ++i) {
                const double excess = snap.W[i] - other->W[i];
                if (excess > rep.max_violation) {
                    rep.max_violation = excess;
                    rep.at_s = snap.s[i];
                    rep.at_t = snap.t;
                    rep.eps_coarse = coarse.epsilon;
                    rep.eps_fine = fine.epsilon;
                }
            }
        }
    }
    rep.ok = rep.max_violation <= rep.tolerance;
    return rep;
}

SweepResult proper_sweep(const ValidatedParams& params, const SignalProfile& profile, const Mesh& mesh,
                         const MassFunction& W0, const SolverConfig& config, const std::vector<double>& eps_list,
                         unsigned threads, double tolerance_rel) {
    if (eps_list.empty()) throw std::invalid_argument("proper_sweep: empty epsilon list");
    for (std::size_t k = 0; k < eps_list.size(); ++k) {
        if (!(eps_list[k] > 0.0 && eps_list[k] < 1.0))
            throw ParameterError(ParameterIssue{"eps_list", eps_list[k], "(0, 1)", "every epsilon must lie in (0, 1)"});
        if (k > 0 && !(eps_list[k] < eps_list[k - 1]))
            throw ParameterError(ParameterIssue{"eps_list", eps_list[k], "strictly decreasing",
                                                "eps_list must be strictly decreasing"});
    }

    SweepResult result;
    result.runs.resize(eps_list.size());
    const double eps_min = eps_list.back();

    auto run_one = [&](std::size_t k) {
        SweepRun& run = result.runs[k];
        run.epsilon = eps_list[k];
        SolverConfig cfg = config;
        cfg.epsilon = eps_list[k];
        cfg.step_control = StepControl::uniform;
        cfg.cfl_epsilon = eps_min;
        try {
            run.trajectory = solve_regularized(params, profile, mesh, W0, cfg);
        } catch (const std::exception& e) {
            run.error = e.what();
        }
    };

    threads = std::max(1u, threads);
    if (threads == 1) {
        for (std::size_t k = 0; k < eps_list.size(); ++k) run_one(k);
    } else {
        std::vector<std::future<void>> pending;
        std::size_t next = 0;
        std::mutex m;
        auto worker = [&] {
            for (;;) {
                std::size_t k;
                {
                    std::lock_guard lock(m);
                    if (next >= eps_list.size()) return;
                    k = next++;
                }
                run_one(k);
            }
        };
        for (unsigned w = 0; w < threads; ++w) pending.push_back(std::async(std::launch::async, worker));
        for (auto& f : pending) f.get();
    }

    std::vector<const Trajectory*> done;
    for (const auto& run : result.runs)
        if (run.trajectory) done.push_back(&*run.trajectory);
    result.report = epsilon_monotonicity(done, params.mass_cap, tolerance_rel);
    return result;
}

ComparisonReport comparison_check(const Trajectory& traj, const SpaceTimeFunction& candidate, ComparisonKind kind,
                                  double tol, double s_hi, double t_hi) {
    ComparisonReport rep;
    for (const auto& snap : traj.snapshots) {
        if (snap.t > t_hi) continue;
        for (std::size_t i = 0; i < snap.size(); ++i) {
            if (snap.s[i] > s_hi) break;
            const double c = candidate(snap.s[i], snap.t);
            const double margin = kind == ComparisonKind::sub ? snap.W[i] - c : c - snap.W[i];
            ++rep.points;
            if (margin < rep.worst_margin) {
                rep.worst_margin = margin;
                rep.at_s = snap.s[i];
                rep.at_t = snap.t;
            }
        }
    }
    rep.ok = rep.worst_margin >= -tol;
    return rep;
}

double estimate_c_sub(const Trajectory& traj, const MassFunction& W0, double t_hi) {
    const double w01 = W0.at(1.0);
    if (!(w01 > 0.0)) throw std::domain_error("estimate_c_sub: W0(1) must be positive");
    double c = 1.0;
    for (const auto& snap : traj.snapshots)
        if (snap.t <= t_hi) c = std::min(c, snap.at(0.5) / w01);
    return c;
}

SpaceTimeFunction make_subsolution(double c_sub, const MassFunction& W0) {
    return [c_sub, W0](double s, double) { return c_sub * s * s * W0.at(s); };
}

}  // namespace ksb

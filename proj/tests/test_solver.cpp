#include "ksb/solver.hpp"

#include <doctest.h>

#include <cmath>

using namespace ksb;

namespace {

struct Setup {
    ValidatedParams vp = validate(SystemParams{});
    SignalProfile profile{vp};
    Mesh mesh = build_mesh(4.0, 512, 1.0241);
    MassFunction W0 = w0_from_density(RadialDensity::plateau(1.0), 3, mesh);
};

const Setup& setup() {
    static const Setup s;
    return s;
}

void check_invariants(const Trajectory& tr, double cap) {
    for (const auto& w : tr.snapshots) {
        CHECK(w.W.front() == 0.0);
        double lo = INFINITY, hi = -INFINITY;
        for (double v : w.W) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        CHECK(lo >= 0.0);
        CHECK(hi <= cap * (1.0 + 1e-10));
        CHECK(w.min_increment() >= -1e-10 * cap);
    }
}

}  // namespace

TEST_CASE("scenario run keeps its invariants") {
    const auto& s = setup();
    SolverConfig cfg;
    cfg.epsilon = 1e-2;
    cfg.t_end = 0.02;
    cfg.output_times = {0.005, 0.01, 0.015};
    const Trajectory tr = solve_regularized(s.vp, s.profile, s.mesh, s.W0, cfg);
    CHECK(tr.snapshots.size() == 5);
    CHECK(tr.times() == std::vector<double>{0.0, 0.005, 0.01, 0.015, 0.02});
    CHECK(tr.violations.empty());
    check_invariants(tr, s.vp.mass_cap);
    CHECK(tr.dt.steps > 0);
    CHECK(tr.dt.min <= tr.dt.max);
}

TEST_CASE("negligible signal keeps W monotone") {
    SystemParams p;
    p.f0 = 1e-12;
    const ValidatedParams vp = validate(p);
    const SignalProfile profile(vp);
    const auto& s = setup();
    SolverConfig cfg;
    cfg.epsilon = 1e-2;
    cfg.t_end = 0.005;
    const Trajectory tr = solve_regularized(vp, profile, s.mesh, s.W0, cfg);
    for (const auto& w : tr.snapshots) CHECK(w.min_increment() >= -1e-10);
}

TEST_CASE("identical runs are bitwise identical") {
    const auto& s = setup();
    SolverConfig cfg;
    cfg.epsilon = 1e-2;
    cfg.t_end = 0.003;
    const Trajectory a = solve_regularized(s.vp, s.profile, s.mesh, s.W0, cfg);
    const Trajectory b = solve_regularized(s.vp, s.profile, s.mesh, s.W0, cfg);
    REQUIRE(a.snapshots.size() == b.snapshots.size());
    for (std::size_t k = 0; k < a.snapshots.size(); ++k) CHECK(a.snapshots[k].W == b.snapshots[k].W);
}

TEST_CASE("sweep monotonicity") {
    const auto& s = setup();
    SolverConfig cfg;
    cfg.t_end = 0.004;
    cfg.output_times = {0.001, 0.002, 0.003};
    const SweepResult one = proper_sweep(s.vp, s.profile, s.mesh, s.W0, cfg, {1e-2});
    CHECK(one.report.comparisons == 0);
    CHECK(one.report.ok);

    const SweepResult r = proper_sweep(s.vp, s.profile, s.mesh, s.W0, cfg, {1e-2, 1e-3}, 2);
    REQUIRE(r.runs[0].trajectory);
    REQUIRE(r.runs[1].trajectory);
    CHECK(r.report.comparisons == 5);
    CHECK(r.report.max_violation <= 1e-6 * s.vp.mass_cap);
    for (std::size_t k = 0; k < r.runs[0].trajectory->snapshots.size(); ++k) {
        const auto& c = r.runs[0].trajectory->snapshots[k].W;
        const auto& f = r.runs[1].trajectory->snapshots[k].W;
        for (std::size_t i = 0; i < c.size(); ++i) CHECK(f[i] >= c[i] - 1e-6);
    }

    CHECK_THROWS_AS(proper_sweep(s.vp, s.profile, s.mesh, s.W0, cfg, {1e-3, 1e-2}), ParameterError);
    CHECK_THROWS_AS(proper_sweep(s.vp, s.profile, s.mesh, s.W0, cfg, {1e-2, 1e-2}), ParameterError);
}

TEST_CASE("comparison checks") {
    const auto& s = setup();
    SolverConfig cfg;
    cfg.epsilon = 1e-2;
    cfg.t_end = 0.01;
    cfg.output_times = {0.0025, 0.005, 0.0075};
    const Trajectory tr = solve_regularized(s.vp, s.profile, s.mesh, s.W0, cfg);

    const double c_sub = estimate_c_sub(tr, s.W0, 0.01);
    CHECK(c_sub > 0.0);
    CHECK(c_sub <= 1.0);
    const auto sub = comparison_check(tr, make_subsolution(c_sub, s.W0), ComparisonKind::sub, 1e-6, 1.0);
    CHECK(sub.ok);

    const double cap = s.vp.mass_cap;
    const auto super = comparison_check(tr, [cap](double, double) { return cap; }, ComparisonKind::super, 1e-10);
    CHECK(super.ok);

    const std::size_t node = 300;
    const double s_bad = s.mesh.nodes[node];
    const MassFunction& last = tr.snapshots.back();
    const auto bad = comparison_check(
        tr, [&](double x, double t) { return x == s_bad && t == last.t ? last.W[node] + 1e-3 : 0.0; },
        ComparisonKind::sub, 1e-6);
    CHECK_FALSE(bad.ok);
    CHECK(bad.at_s == s_bad);
    CHECK(bad.at_t == last.t);
    CHECK(bad.worst_margin == doctest::Approx(-1e-3).epsilon(1e-9));
}

TEST_CASE("configuration errors") {
    const auto& s = setup();
    SolverConfig cfg;
    cfg.epsilon = 0.0;
    CHECK_THROWS_AS(solve_regularized(s.vp, s.profile, s.mesh, s.W0, cfg), ParameterError);
    cfg = {};
    cfg.epsilon = 1e-7;
    CHECK_THROWS_AS(solve_regularized(s.vp, s.profile, s.mesh, s.W0, cfg), ParameterError);
    const Mesh small = build_mesh(2.0, 512, 1.0241);
    cfg = {};
    CHECK_THROWS_AS(solve_regularized(s.vp, s.profile, small, w0_from_density(RadialDensity::plateau(1.0), 3, small), cfg),
                    ParameterError);
}

TEST_CASE("refinement differences shrink") {
    const auto& s = setup();
    const Mesh m0 = build_mesh(4.0, 128, 1.1, 1.0);
    const Mesh meshes[3] = {m0, refine(m0), refine(refine(m0))};
    const Cutoff cut(1e-2);
    double dt = INFINITY;
    for (int l = 0; l < 3; ++l) dt = std::min(dt, std::ldexp(uniform_step(s.vp, s.profile, meshes[l], cut, 0.4), l));
    std::vector<std::vector<double>> probes(3);
    const double ps[] = {0.1, 0.3, 0.5, 0.8, 1.0, 1.5};
    for (int l = 0; l < 3; ++l) {
        SolverConfig cfg;
        cfg.epsilon = 1e-2;
        cfg.t_end = 0.01;
        cfg.step_control = StepControl::uniform;
        cfg.dt = std::ldexp(dt, -l);
        const auto tr =
            solve_regularized(s.vp, s.profile, meshes[l], w0_from_density(RadialDensity::plateau(1.0), 3, meshes[l]), cfg);
        for (double p : ps) probes[l].push_back(tr.snapshots.back().at(p));
    }
    double d01 = 0, d12 = 0;
    for (std::size_t k = 0; k < std::size(ps); ++k) {
        d01 = std::max(d01, std::abs(probes[1][k] - probes[0][k]));
        d12 = std::max(d12, std::abs(probes[2][k] - probes[1][k]));
    }
    MESSAGE("probe differences " << d01 << " then " << d12);
    CHECK(d01 / d12 >= 1.5);
}

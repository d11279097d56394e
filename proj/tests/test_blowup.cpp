#include "ksb/blowup.hpp"

#include <doctest.h>

#include <cmath>
#include <memory>

using namespace ksb;

namespace {

struct Fixture {
    ValidatedParams vp = validate(SystemParams{});
    std::shared_ptr<const SignalProfile> profile = std::make_shared<const SignalProfile>(vp);
    TestFunction seed = build_testfunction(vp, profile, {4.0, 0.8, 20.0});
    Mesh mesh = build_mesh(4.0, 512, 1.0241);
    MassFunction W0 = w0_from_density(RadialDensity::plateau(1.0), 3, mesh);
};

const Fixture& fx() {
    static const Fixture f;
    return f;
}

}  // namespace

TEST_CASE("log sinh") {
    for (double x : {1e-8, 0.1, 1.0, 10.0, 30.0})
        CHECK(log_sinh(x) == doctest::Approx(std::log(std::sinh(x))).epsilon(1e-12));
    CHECK(log_sinh(1000.0) == doctest::Approx(1000.0 - std::log(2.0)).epsilon(1e-15));
}

TEST_CASE("selection on the scenario with a synthetic probe") {
    const auto& f = fx();
    // A probe growing like the plateau: W(s) = s.
    const Selection sel = select_blowup_params({0.0, 0.1, 1.0, 0.5}, f.seed, [](double s) { return s; });
    CHECK(sel.kappa == f.seed.k0 * 0.1 / 8.0);
    CHECK(sel.kappa == doctest::Approx(0.00674645).epsilon(1e-6));
    CHECK(sel.gamma_floor_support == doctest::Approx(10.0).epsilon(1e-14));
    CHECK(sel.gamma_floor_kappa == doctest::Approx(std::pow(4.0 / sel.kappa, 1.5)).epsilon(1e-14));
    CHECK(sel.gamma_floor_kappa == doctest::Approx(14437.0).epsilon(1e-5));
    CHECK(sel.s0_bound == doctest::Approx(std::sqrt(2.0 * std::pow(sel.kappa, 3) / 3.0)).epsilon(1e-13));
    CHECK(sel.s0_bound == doctest::Approx(4.5245e-4).epsilon(1e-4));
    CHECK(sel.gamma >= 14437.1 * (1 - 1e-12));

    // Both sides recomputed in plain arithmetic.
    const double k0K0 = f.seed.k0 * f.seed.K0;
    CHECK(k0K0 / sel.kappa <= 0.5 * std::pow(sel.s0, 3) * std::sinh(std::pow(sel.kappa, 3) / (sel.s0 * sel.s0)));
    CHECK(sel.s0 < sel.s0_bound);
    const double X = sel.kappa * std::pow(sel.gamma, 2.0 / 3.0);
    CHECK(sel.probe_s == doctest::Approx(sel.kappa * std::pow(sel.gamma, -1.0 / 3.0)).epsilon(1e-14));
    CHECK(sel.s0 > sel.probe_s);
    CHECK(1.0 + 2.0 * k0K0 * std::exp(X) / (sel.probe_W * std::cbrt(sel.gamma)) <= std::exp(2.0 * X));
    // The previous doubling must have failed one of the two conditions.
    if (sel.doublings > 0) {
        const double g = sel.gamma / 2.0;
        const double Xp = sel.kappa * std::pow(g, 2.0 / 3.0);
        const double ps = sel.kappa * std::pow(g, -1.0 / 3.0);
        const bool prev_ok = sel.s0 > ps && 1.0 + 2.0 * k0K0 * std::exp(Xp) / (ps * std::cbrt(g)) <= std::exp(2.0 * Xp);
        CHECK_FALSE(prev_ok);
    }
}

TEST_CASE("selection failure past the cap") {
    const auto& f = fx();
    SelectionInput in{0.0, 0.1, 1.0, 0.5};
    in.gamma_cap = 2e4;
    CHECK_THROWS_AS(select_blowup_params(in, f.seed, [](double) { return 1e-300; }), SelectionError);
}

TEST_CASE("y for the constant state is constant and equals cap times the integral") {
    const auto& f = fx();
    const TestFunction tf = build_testfunction(f.vp, f.profile, {4.0, 0.8, 200.0});
    Trajectory tr;
    tr.mesh = f.mesh;
    for (double t : {0.0, 0.01, 0.02}) tr.snapshots.push_back({f.mesh.nodes, std::vector<double>(f.mesh.nodes.size(), 1.0), t, 1.0, std::nullopt});
    const YReport r = y_functional(tr, tf, 1.0, 0.01, 0.01);
    for (double y : r.y) CHECK(y == doctest::Approx(tf.integral()).epsilon(1e-12));
    CHECK(r.cap_ok);
    CHECK(r.y1 == doctest::Approx(r.cap_bound).epsilon(1e-12));
    CHECK_THROWS_AS(y_functional(tr, tf, 1.0, 0.01, 0.5), std::out_of_range);
}

TEST_CASE("y of the plateau matches an independent sum") {
    const auto& f = fx();
    const TestFunction tf = build_testfunction(f.vp, f.profile, {4.0, 0.8, 20.0});
    // int phi(s) min(s, 1) ds with midpoint sums in u = s^(1/5) up to s = 30.
    const int m = 400000;
    const double uh = std::pow(30.0, 0.2) / m;
    double acc = 0.0;
    for (int i = 0; i < m; ++i) {
        const double u = (i + 0.5) * uh, s = std::pow(u, 5.0);
        acc += tf.phi(s).value * std::min(s, 1.0) * 5.0 * std::pow(u, 4.0) * uh;
    }
    CHECK(y_value(f.W0, tf, 1.0) == doctest::Approx(acc).epsilon(1e-7));
}

TEST_CASE("indicator rows") {
    const auto& f = fx();
    const IndicatorRow r = indicator_row(f.W0, {1.0, 2.0}, f.mesh.s_max, 4.0 * M_PI / 3.0);
    CHECK(r.ratio[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.ratio[1] >= r.ratio[0]);
    CHECK(r.lipschitz == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(r.atom == doctest::Approx(0.0).epsilon(1e-12));
    Trajectory tr;
    tr.mesh = f.mesh;
    tr.snapshots.push_back(f.W0);
    CHECK_THROWS_AS(blowup_indicator(tr, {0.5}, 1.0), std::invalid_argument);
}

TEST_CASE("trend assessment and report") {
    BlowupReport rep;
    rep.betas = {1.0};
    for (double eps : {1e-2, 1e-3}) {
        RunIndicators ri;
        ri.epsilon = eps;
        ri.sup_ratio = {eps == 1e-2 ? 1.0 : 2.0};
        ri.sup_lipschitz = eps == 1e-2 ? 3.0 : 9.0;
        ri.rows.push_back({0.01, {ri.sup_ratio[0]}, ri.sup_lipschitz, 0.0});
        rep.runs.push_back(ri);
    }
    assess_trend(rep, 0.01);
    CHECK(rep.indicator_trend);
    CHECK(rep.lipschitz_factor == doctest::Approx(3.0));
    const std::string json = to_json(rep);
    CHECK(json.find("\"lipschitz_factor\": 3") != std::string::npos);
    std::swap(rep.runs[0], rep.runs[1]);
    CHECK_THROWS_AS(assess_trend(rep, 0.01), std::invalid_argument);
}

#include "ksb/blowup.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace ksb {

namespace {

// log(1 + e^x)
double log1p_exp(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

}  // namespace

double log_sinh(double x) {
    if (!(x > 0.0)) throw std::domain_error("log_sinh needs x > 0");
    if (x < 1.0) return std::log(std::sinh(x));
    return x + std::log1p(-std::exp(-2.0 * x)) - std::log(2.0);
}

Selection select_blowup_params(const SelectionInput& in, const TestFunction& seed, const ProbeW& probe) {
    if (!(in.eta > 0.0)) throw std::invalid_argument("eta must be positive");
    if (!(in.c_sub > 0.0)) throw std::invalid_argument("c_sub must be positive");
    if (!(in.c0 > 0.0)) throw std::invalid_argument("c0 must be positive");
    const double n = seed.n;
    Selection sel;
    sel.kappa = seed.k0 * in.eta / 8.0;
    const double kappa = sel.kappa;
    sel.s0_bound = std::pow(2.0 * std::pow(kappa, n / (n - 2.0)) / (3.0 * (n - 2.0)), (n - 2.0) / 2.0);
    sel.s0_log_lhs = std::log(seed.k0 * seed.K0 / kappa);

    const double log_c = std::log(in.c0 * in.c_sub);
    const auto rhs = [&](double s) {
        return log_c + 3.0 * std::log(s) + log_sinh(kappa * std::pow(kappa / s, 2.0 / (n - 2.0)));
    };
    // rhs decreases on (0, s0_bound); take the largest admissible point strictly inside.
    double hi = sel.s0_bound * (1.0 - 1e-9);
    if (rhs(hi) >= sel.s0_log_lhs) {
        sel.s0 = hi;
    } else {
        double lo = hi;
        while (rhs(lo) < sel.s0_log_lhs) {
            lo *= 0.5;
            if (lo < 1e-300) throw SelectionError("no s0 satisfies the sinh inequality", "s0 sinh");
        }
        for (int it = 0; it < 200 && hi / lo > 1.0 + 1e-14; ++it) {
            const double mid = std::sqrt(lo * hi);
            (rhs(mid) >= sel.s0_log_lhs ? lo : hi) = mid;
        }
        sel.s0 = lo;
    }
    sel.s0 = std::min(sel.s0, std::nextafter(1.0, 0.0));
    sel.s0_log_rhs = rhs(sel.s0);
    sel.s0_ok = sel.s0_log_rhs >= sel.s0_log_lhs && sel.s0 < sel.s0_bound;

    sel.gamma_floor_support = 4.0 / (seed.R - seed.rho);
    sel.gamma_floor_kappa = std::pow(seed.xi / kappa, n / 2.0);
    sel.probe_t = in.t0 + in.eta / 2.0;
    double gamma = std::nextafter(std::max(sel.gamma_floor_support, sel.gamma_floor_kappa),
                                  std::numeric_limits<double>::infinity());
    const double log_2k0K0 = std::log(2.0 * seed.k0 * seed.K0);
    for (;;) {
        sel.gamma = gamma;
        const double X = kappa * std::pow(gamma, 2.0 / n);
        sel.probe_s = kappa * std::pow(gamma, (2.0 - n) / n);
        sel.probe_ok = sel.s0 > sel.probe_s;
        sel.probe_W = probe(sel.probe_s);
        sel.growth_log_rhs = 2.0 * X;
        if (sel.probe_W > 0.0) {
            sel.growth_log_lhs = log1p_exp(log_2k0K0 + X - std::log(sel.probe_W) - (n - 2.0) / n * std::log(gamma));
            sel.growth_ok = sel.growth_log_lhs <= sel.growth_log_rhs;
        } else {
            sel.growth_log_lhs = std::numeric_limits<double>::infinity();
            sel.growth_ok = false;
        }
        if (sel.probe_ok && sel.growth_ok) break;
        gamma *= 2.0;
        ++sel.doublings;
        if (gamma > in.gamma_cap) {
            const std::string which = !sel.probe_ok ? "s0 > kappa gamma^((2-n)/n)"
                                                    : "1 + 2 k0 K0 e^{kappa gamma^(2/n)} / (W gamma^((n-2)/n)) "
                                                      "<= e^{2 kappa gamma^(2/n)}";
            throw SelectionError("gamma search exceeded its cap without satisfying " + which, which);
        }
    }
    if (!sel.s0_ok) throw SelectionError("s0 does not satisfy the sinh inequality", "s0 sinh");
    return sel;
}

double y_value(const MassFunction& w, const TestFunction& tf, double cap) {
    double y = 0.0;
    double P0 = 0.0, P1 = 0.0;  // antiderivatives at the left node (both vanish at s = 0)
    for (std::size_t i = 0; i + 1 < w.s.size(); ++i) {
        const double sl = w.s[i], sr = w.s[i + 1];
        const double Q0 = tf.antiderivative(sr), Q1 = tf.first_moment_antiderivative(sr);
        const double m = (w.W[i + 1] - w.W[i]) / (sr - sl);
        y += (w.W[i] - m * sl) * (Q0 - P0) + m * (Q1 - P1);
        P0 = Q0;
        P1 = Q1;
    }
    return y + cap * (tf.integral() - P0);
}

YReport y_functional(const Trajectory& traj, const TestFunction& tf, double cap, double kappa, double t1,
                     double tol_rel) {
    if (traj.snapshots.empty() || traj.snapshots.back().t < t1)
        throw std::out_of_range("trajectory ends before t1");
    YReport rep;
    rep.t1 = t1;
    rep.phi_integral = tf.integral();
    rep.cap_bound = cap * rep.phi_integral;
    rep.cap_ok = true;
    for (const auto& w : traj.snapshots) {
        rep.t.push_back(w.t);
        rep.y.push_back(y_value(w, tf, cap));
        if (rep.y.back() > rep.cap_bound * (1.0 + 1e-12)) rep.cap_ok = false;
    }
    const MassFunction& w1 = traj.at_time(t1);
    rep.y1 = y_value(w1, tf, cap);
    const double n = tf.n;
    rep.c_gamma = w1.at(kappa * std::pow(tf.gamma, (2.0 - n) / n));
    rep.lower_bound = rep.c_gamma / tf.gamma * std::exp(-kappa * std::pow(tf.gamma, 2.0 / n));
    rep.lower_ok = rep.y1 >= rep.lower_bound * (1.0 - 1e-9);

    rep.riccati_A = tf.rate();
    rep.riccati_B = tf.gamma * tf.gamma / (2.0 * tf.K0);
    rep.z.assign(rep.t.size(), std::numeric_limits<double>::quiet_NaN());
    if (!(rep.y1 > 0.0)) return rep;
    const Riccati z(rep.riccati_A, rep.riccati_B, rep.y1, t1);
    rep.riccati_T = z.blowup_time();
    rep.riccati_ok = true;
    rep.riccati_worst = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < rep.t.size(); ++k) {
        if (rep.t[k] < t1) continue;
        if (!(rep.t[k] - t1 < rep.riccati_T)) {
            rep.z[k] = std::numeric_limits<double>::infinity();
            continue;
        }
        rep.z[k] = z(rep.t[k]);
        ++rep.riccati_compared;
        const double m = (rep.y[k] - rep.z[k]) / std::max(std::abs(rep.z[k]), std::numeric_limits<double>::min());
        rep.riccati_worst = std::min(rep.riccati_worst, m);
        if (m < -tol_rel) rep.riccati_ok = false;
    }
    return rep;
}

IndicatorRow indicator_row(const MassFunction& w, const std::vector<double>& betas, double s_max, double atom_scale) {
    IndicatorRow row;
    row.t = w.t;
    row.ratio.assign(betas.size(), 0.0);
    const std::size_t N = w.s.size() - 1;
    for (std::size_t i = 1; i <= N; ++i) {
        const double s = w.s[i];
        if (s <= 0.5 * s_max)
            for (std::size_t k = 0; k < betas.size(); ++k)
                row.ratio[k] = std::max(row.ratio[k], w.W[i] / std::pow(s, betas[k]));
        row.lipschitz = std::max(row.lipschitz, (w.W[i] - w.W[i - 1]) / (s - w.s[i - 1]));
    }
    row.atom = atom_scale * extrapolate_origin(w);
    return row;
}

RunIndicators blowup_indicator(const Trajectory& traj, const std::vector<double>& betas, double atom_scale) {
    for (double b : betas)
        if (!(b >= 1.0)) throw std::invalid_argument("indicator exponents must be >= 1");
    RunIndicators run;
    run.epsilon = traj.epsilon;
    run.mesh_N = traj.mesh.N();
    run.s_max = traj.mesh.s_max;
    run.sup_ratio.assign(betas.size(), 0.0);
    for (const auto& w : traj.snapshots) {
        run.rows.push_back(indicator_row(w, betas, run.s_max, atom_scale));
        const auto& r = run.rows.back();
        for (std::size_t k = 0; k < betas.size(); ++k) run.sup_ratio[k] = std::max(run.sup_ratio[k], r.ratio[k]);
        run.sup_lipschitz = std::max(run.sup_lipschitz, r.lipschitz);
        run.sup_atom = std::max(run.sup_atom, r.atom);
    }
    return run;
}

void assess_trend(BlowupReport& report, double trend_time) {
    report.trend_time = trend_time;
    report.indicator_trend = report.runs.size() >= 2;
    for (std::size_t r = 1; r < report.runs.size(); ++r) {
        const auto& a = report.runs[r - 1];
        const auto& b = report.runs[r];
        if (!(b.epsilon < a.epsilon)) throw std::invalid_argument("runs must be ordered by decreasing epsilon");
        for (std::size_t k = 0; k < report.betas.size(); ++k)
            if (b.sup_ratio[k] < a.sup_ratio[k]) report.indicator_trend = false;
        if (b.sup_lipschitz < a.sup_lipschitz) report.indicator_trend = false;
    }
    report.lipschitz_factor = 0.0;
    if (report.runs.size() >= 2) {
        const auto lip_at = [&](const RunIndicators& run) {
            for (const auto& row : run.rows)
                if (row.t == trend_time) return row.lipschitz;
            throw std::out_of_range("no snapshot at the trend time");
        };
        report.lipschitz_factor = lip_at(report.runs.back()) / lip_at(report.runs.front());
    }
}

namespace {

using nlohmann::ordered_json;

// Non-finite values become strings; JSON has no literal for them.
struct Num {
    double v;
};

void to_json(ordered_json& j, const Num& x) {
    if (std::isfinite(x.v))
        j = x.v;
    else
        j = std::isnan(x.v) ? "nan" : (x.v > 0 ? "inf" : "-inf");
}

ordered_json nums(const std::vector<double>& v) {
    ordered_json a = ordered_json::array();
    for (double x : v) a.push_back(Num{x});
    return a;
}

}  // namespace

std::string to_json(const BlowupReport& report) {
    ordered_json j;
    j["betas"] = nums(report.betas);
    j["runs"] = ordered_json::array();
    for (const auto& run : report.runs) {
        ordered_json r;
        r["epsilon"] = Num{run.epsilon};
        r["mesh_N"] = run.mesh_N;
        r["s_max"] = Num{run.s_max};
        r["sup_ratio"] = nums(run.sup_ratio);
        r["sup_lipschitz"] = Num{run.sup_lipschitz};
        r["sup_atom"] = Num{run.sup_atom};
        ordered_json rows = ordered_json::array();
        for (const auto& row : run.rows) {
            ordered_json o;
            o["t"] = Num{row.t};
            o["ratio"] = nums(row.ratio);
            o["lipschitz"] = Num{row.lipschitz};
            o["atom"] = Num{row.atom};
            rows.push_back(std::move(o));
        }
        r["rows"] = std::move(rows);
        j["runs"].push_back(std::move(r));
    }
    j["trend"] = {{"note", "finite-epsilon trend, not a proof of blow-up"},
                  {"indicators_nondecreasing_in_epsilon", report.indicator_trend},
                  {"trend_time", Num{report.trend_time}},
                  {"lipschitz_factor", Num{report.lipschitz_factor}}};
    const auto& tf = report.tf;
    j["test_function"] = {{"xi", Num{tf.xi}},         {"delta", Num{tf.delta}}, {"gamma", Num{tf.gamma}},
                          {"a", Num{tf.a}},           {"b", Num{tf.b}},         {"c1", Num{tf.c1}},
                          {"c2", Num{tf.c2}},         {"k0", Num{tf.k0}},       {"K0", Num{tf.K0}},
                          {"K0_without_delta", Num{tf.K0_without_delta}}};
    if (report.has_selection) {
        const auto& s = report.selection;
        j["selection"] = {
            {"note", "growth inequality evaluated with the measured regularized W in place of the proper solution"},
            {"kappa", Num{s.kappa}},
            {"s0", Num{s.s0}},
            {"s0_bound", Num{s.s0_bound}},
            {"gamma", Num{s.gamma}},
            {"gamma_floor_support", Num{s.gamma_floor_support}},
            {"gamma_floor_kappa", Num{s.gamma_floor_kappa}},
            {"doublings", s.doublings},
            {"probe_s", Num{s.probe_s}},
            {"probe_t", Num{s.probe_t}},
            {"probe_W", Num{s.probe_W}},
            {"s0_log_lhs", Num{s.s0_log_lhs}},
            {"s0_log_rhs", Num{s.s0_log_rhs}},
            {"growth_log_lhs", Num{s.growth_log_lhs}},
            {"growth_log_rhs", Num{s.growth_log_rhs}},
            {"s0_ok", s.s0_ok},
            {"probe_ok", s.probe_ok},
            {"growth_ok", s.growth_ok}};
    }
    if (report.has_y) {
        const auto& y = report.y;
        j["y_functional"] = {{"t", nums(y.t)},
                             {"y", nums(y.y)},
                             {"z", nums(y.z)},
                             {"phi_integral", Num{y.phi_integral}},
                             {"cap_bound", Num{y.cap_bound}},
                             {"cap_ok", y.cap_ok},
                             {"t1", Num{y.t1}},
                             {"y1", Num{y.y1}},
                             {"c_gamma", Num{y.c_gamma}},
                             {"lower_bound", Num{y.lower_bound}},
                             {"lower_ok", y.lower_ok},
                             {"riccati_A", Num{y.riccati_A}},
                             {"riccati_B", Num{y.riccati_B}},
                             {"riccati_T", Num{y.riccati_T}},
                             {"riccati_dominated", y.riccati_ok},
                             {"riccati_worst_relative_margin", Num{y.riccati_worst}},
                             {"riccati_compared", y.riccati_compared},
                             {"riccati_note", "finite-epsilon run; domination is expected only in the limit"}};
    }
    return j.dump(2) + "\n";
}

}  // namespace ksb

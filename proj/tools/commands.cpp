#include "commands.hpp"

#include "ksb/blowup.hpp"
#include "ksb/io.hpp"
#include "ksb/mesh.hpp"
#include "ksb/transform.hpp"
#include "ksb/weak.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <memory>
#include <ostream>
#include <sstream>

namespace ksb::cli {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string snapshot_name(double t) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "snapshot_t%.10g.csv", t);
    return buf;
}

std::string run_dir_name(double eps) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "run_eps_%.6g", eps);
    return buf;
}

namespace {

// Lists emitted files and writes manifest.json with their hashes last.
class Manifest {
public:
    Manifest(fs::path root, std::string command, const RunConfig& config)
        : root_(std::move(root)), command_(std::move(command)) {
        fs::create_directories(root_);
        config_ = json::parse(dump_config(config));
    }

    const fs::path& root() const { return root_; }

    void add(const fs::path& file) { files_.push_back(fs::relative(file, root_)); }

    void text(const fs::path& rel, std::string_view body) {
        fs::create_directories((root_ / rel).parent_path());
        write_text(root_ / rel, body);
        add(root_ / rel);
    }

    void table(const fs::path& rel, const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows) {
        fs::create_directories((root_ / rel).parent_path());
        write_table(root_ / rel, header, rows);
        add(root_ / rel);
    }

    void snapshot(const fs::path& dir, const MassFunction& w) {
        fs::create_directories(root_ / dir);
        const fs::path p = root_ / dir / snapshot_name(w.t);
        write_csv(w, p);
        add(p);
    }

    json& info() { return info_; }

    int finish(int code, const std::string& status, const std::string& error = {}) {
        json j;
        j["command"] = command_;
        j["status"] = status;
        j["exit_code"] = code;
        if (!error.empty()) j["error"] = error;
        j["config"] = config_;
        for (auto it = info_.begin(); it != info_.end(); ++it) j[it.key()] = it.value();
        json files = json::array();
        for (const auto& f : files_) {
            const fs::path p = root_ / f;
            files.push_back({{"path", f.generic_string()},
                             {"sha256", sha256_file(p)},
                             {"bytes", static_cast<std::uint64_t>(fs::file_size(p))}});
        }
        j["files"] = std::move(files);
        write_text(root_ / "manifest.json", j.dump(2) + "\n");
        return code;
    }

private:
    fs::path root_;
    std::string command_;
    json config_;
    json info_ = json::object();
    std::vector<fs::path> files_;
};

std::string describe(const ParameterError& e) {
    std::ostringstream os;
    os << "invalid parameters:";
    for (const auto& i : e.issues())
        os << "\n  " << i.field << " = " << format_double(i.value) << " (admissible " << i.admissible << "): " << i.message;
    return os.str();
}

json dt_json(const DtHistory& h) {
    json trace = json::array();
    for (const auto& [step, dt] : h.trace) trace.push_back({step, dt});
    return {{"steps", h.steps}, {"min", h.min}, {"max", h.max}, {"trace", trace}};
}

json run_json(const Trajectory& tr) {
    json v = json::array();
    for (const auto& x : tr.violations) v.push_back({{"kind", x.kind}, {"t", x.t}, {"s", x.s}, {"magnitude", x.magnitude}});
    return {{"epsilon", tr.epsilon},
            {"mesh_N", tr.mesh.N()},
            {"snapshots", tr.snapshots.size()},
            {"wall_seconds", tr.wall_seconds},
            {"dt", dt_json(tr.dt)},
            {"violations", v}};
}

std::vector<std::string> indicator_header(const std::vector<double>& betas) {
    std::vector<std::string> h{"t"};
    for (double b : betas) {
        char buf[48];
        std::snprintf(buf, sizeof buf, "ratio_beta_%g", b);
        h.push_back(buf);
    }
    h.push_back("lipschitz");
    h.push_back("atom");
    return h;
}

std::vector<std::vector<double>> indicator_rows(const RunIndicators& ind) {
    std::vector<std::vector<double>> rows;
    for (const auto& r : ind.rows) {
        std::vector<double> row{r.t};
        row.insert(row.end(), r.ratio.begin(), r.ratio.end());
        row.push_back(r.lipschitz);
        row.push_back(r.atom);
        rows.push_back(std::move(row));
    }
    return rows;
}

// Shared setup of every solver-facing command.
struct Scenario {
    ValidatedParams vp;
    std::shared_ptr<const SignalProfile> profile;
    Mesh mesh;
    MassFunction W0;
};

Scenario make_scenario(const RunConfig& c) {
    Scenario sc;
    sc.vp = validate(c.system);
    sc.profile = std::make_shared<const SignalProfile>(sc.vp, c.signal.bridge, c.signal.breakpoints);
    sc.mesh = build_mesh(c.mesh.s_max, c.mesh.N, c.mesh.ratio, c.mesh.max_first_fraction);
    sc.W0 = w0_from_density(RadialDensity::plateau(c.system.c0), sc.vp.n(), sc.mesh);
    return sc;
}

void write_run(Manifest& m, const fs::path& dir, const Trajectory& tr, const std::vector<double>& betas, double atom_scale) {
    for (const auto& w : tr.snapshots) m.snapshot(dir, w);
    const RunIndicators ind = blowup_indicator(tr, betas, atom_scale);
    m.table(dir / "indicators.csv", indicator_header(betas), indicator_rows(ind));
}

json monotonicity_json(const MonotonicityReport& r) {
    return {{"ok", r.ok},
            {"max_violation", r.max_violation},
            {"at_s", r.at_s},
            {"at_t", r.at_t},
            {"eps_coarse", r.eps_coarse},
            {"eps_fine", r.eps_fine},
            {"comparisons", r.comparisons},
            {"tolerance", r.tolerance}};
}

// Loads the config and turns the usual input failures into exit code 1.
template <class Body>
int guarded(const Options& opt, std::ostream& log, Body&& body) {
    RunConfig c;
    try {
        c = load_config(opt.config);
    } catch (const ConfigError& e) {
        log << "config error: " << e.what() << "\n";
        return exit_config;
    }
    if (opt.out) c.output_dir = opt.out->string();
    try {
        return body(c);
    } catch (const ParameterError& e) {
        log << describe(e) << "\n";
        return exit_config;
    } catch (const MeshError& e) {
        log << "mesh error: " << e.what() << " (suggested N = " << e.suggested_N() << ")\n";
        return exit_config;
    }
}

double resolved_delta(const RunConfig& c, const ValidatedParams& vp) {
    return c.test_function.delta.value_or(0.5 * (vp.delta_bound + 1.0));
}

// Any gamma clearing both floors; only gamma-free constants are read from the seed.
double seed_gamma(const RunConfig& c) {
    return 2.0 * std::max(4.0, c.test_function.xi) / (c.system.R - c.system.rho);
}

}  // namespace

int cmd_validate(const Options& opt, std::ostream& log) {
    return guarded(opt, log, [&](const RunConfig& c) {
        const ValidatedParams vp = validate(c.system);
        log << "n = " << vp.n() << ", alpha = " << format_double(c.system.alpha) << ", f0 = " << format_double(c.system.f0)
            << "\n";
        log << "threshold = " << format_double(vp.threshold) << "\n";
        log << "delta_bound = " << format_double(vp.delta_bound) << "\n";
        log << "mass_cap = " << format_double(vp.mass_cap) << "\n";
        log << "feasible = " << (vp.feasible ? "true" : "false") << "\n";
        if (!vp.feasible) {
            log << "f0 must exceed the threshold " << format_double(vp.threshold) << "\n";
            return int(exit_infeasible);
        }
        if (c.test_function.delta || c.test_function.gamma) {
            const TestFnParams tp{c.test_function.xi, resolved_delta(c, vp),
                                  c.test_function.gamma.value_or(seed_gamma(c))};
            if (auto issues = check(vp, tp); !issues.empty()) throw ParameterError(std::move(issues));
        }
        return int(exit_ok);
    });
}

int cmd_simulate(const Options& opt, std::ostream& log) {
    return guarded(opt, log, [&](const RunConfig& c) {
        const Scenario sc = make_scenario(c);
        check_config(c.solver, sc.mesh);
        Manifest m(c.output_dir, "simulate", c);
        const std::vector<double> betas = c.blowup.betas;
        const double atom_scale = sc.vp.sphere_area / sc.vp.n();

        if (c.sweep.eps_list.empty()) {
            try {
                const Trajectory tr = solve_regularized(sc.vp, *sc.profile, sc.mesh, sc.W0, c.solver);
                write_run(m, ".", tr, betas, atom_scale);
                m.info()["runs"] = json::array({run_json(tr)});
                log << "simulate: eps = " << format_double(tr.epsilon) << ", " << tr.snapshots.size() << " snapshots, "
                    << tr.dt.steps << " steps\n";
                return m.finish(exit_ok, "ok");
            } catch (const SolverError& e) {
                log << "solver failure: " << e.what() << "\n";
                return m.finish(exit_solver, "solver failure", e.what());
            }
        }

        const SweepResult sweep =
            proper_sweep(sc.vp, *sc.profile, sc.mesh, sc.W0, c.solver, c.sweep.eps_list, opt.threads);
        json runs = json::array();
        std::string failures;
        for (const auto& run : sweep.runs) {
            if (!run.trajectory) {
                runs.push_back({{"epsilon", run.epsilon}, {"error", run.error}});
                failures += (failures.empty() ? "" : "; ") + run_dir_name(run.epsilon) + ": " + run.error;
                continue;
            }
            write_run(m, run_dir_name(run.epsilon), *run.trajectory, betas, atom_scale);
            json rj = run_json(*run.trajectory);
            rj["directory"] = run_dir_name(run.epsilon);
            runs.push_back(std::move(rj));
        }
        json report = {{"eps_list", c.sweep.eps_list}, {"monotonicity", monotonicity_json(sweep.report)}, {"runs", runs}};
        m.text("sweep_report.json", report.dump(2) + "\n");
        m.info()["runs"] = runs;
        log << "sweep: " << sweep.runs.size() << " runs, monotone = " << (sweep.report.ok ? "true" : "false")
            << ", max violation " << format_double(sweep.report.max_violation) << "\n";
        if (!failures.empty()) {
            log << "solver failure: " << failures << "\n";
            return m.finish(exit_solver, "solver failure", failures);
        }
        return m.finish(exit_ok, "ok");
    });
}

int cmd_verify_lemmas(const Options& opt, std::ostream& log) {
    return guarded(opt, log, [&](const RunConfig& c) {
        const LemmaGrid& g = c.lemmas;
        if (g.f0.empty() || g.delta.empty() || g.gamma.empty()) {
            log << "config error: lemma_grid has an empty axis\n";
            return int(exit_config);
        }
        Manifest m(c.output_dir, "verify-lemmas", c);

        struct Row {
            double f0, delta, gamma;
            std::string status;
            double c2 = NAN, k0 = NAN, min_margin = NAN, at_s = NAN, integral = NAN, bound = NAN;
            double jump = NAN, slope_jump = NAN;
            bool pass = false;
        };
        std::vector<Row> rows;
        std::size_t worst = 0;
        double worst_margin = INFINITY;
        std::vector<double> worst_s, worst_m;

        for (double f0 : g.f0) {
            SystemParams sp = c.system;
            sp.f0 = f0;
            ValidatedParams vp;
            std::shared_ptr<const SignalProfile> profile;
            std::string base_status;
            try {
                vp = validate(sp);
                if (!vp.feasible) base_status = "infeasible";
                else profile = std::make_shared<const SignalProfile>(vp, c.signal.bridge, g.breakpoints);
            } catch (const ParameterError&) {
                base_status = "invalid_parameters";
            }
            for (double delta : g.delta)
                for (double gamma : g.gamma) {
                    Row r{f0, delta, gamma, base_status};
                    if (base_status.empty()) {
                        try {
                            const TestFunction tf = build_testfunction(vp, profile, {g.xi, delta, gamma});
                            r.c2 = tf.c2;
                            r.k0 = tf.k0;
                            const double sw = tf.switch_point();
                            const PhiValue lo = tf.phi(std::nextafter(sw, 0.0)), hi = tf.phi(sw);
                            r.jump = std::abs(lo.value - hi.value) / std::abs(hi.value);
                            r.slope_jump = std::abs(lo.d1 - hi.d1) / std::abs(hi.d1);
                            const auto grid = ode_check_grid(tf, g.s_lo, g.s_hi, g.grid_points);
                            const MarginReport mr = verify_ode_inequality(tf, grid);
                            const IntegralBoundReport ib = verify_integral_bound(tf);
                            r.min_margin = mr.min_margin;
                            r.at_s = mr.at_s;
                            r.integral = ib.numeric;
                            r.bound = ib.bound;
                            const bool cont = r.jump <= 1e-10 && r.slope_jump <= 1e-10;
                            r.pass = mr.pass && ib.holds && cont;
                            r.status = !mr.pass ? "margin_failure" : !ib.holds ? "integral_failure"
                                                                  : !cont      ? "continuity_failure"
                                                                               : "pass";
                            if (g.write_all_scans) {
                                std::vector<std::vector<double>> t;
                                for (std::size_t i = 0; i < mr.s.size(); ++i) t.push_back({mr.s[i], mr.margin[i]});
                                m.table(fs::path("margins") / ("margin_" + std::to_string(rows.size()) + ".csv"),
                                        {"s", "margin"}, t);
                            }
                            if (mr.min_margin < worst_margin) {
                                worst_margin = mr.min_margin;
                                worst = rows.size();
                                worst_s = mr.s;
                                worst_m = mr.margin;
                            }
                        } catch (const InfeasibleTestFunction& e) {
                            r.status = "construction_failure";
                            r.c2 = e.c2();
                        } catch (const ParameterError&) {
                            r.status = "invalid_parameters";
                        }
                    }
                    rows.push_back(std::move(r));
                }
        }

        std::ostringstream csv;
        csv << "index,f0,delta,gamma,xi,status,c2,k0,min_margin,at_s,continuity_jump,slope_jump,integral,bound,pass\n";
        std::size_t failed = 0;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const Row& r = rows[i];
            csv << i << ',' << format_double(r.f0) << ',' << format_double(r.delta) << ',' << format_double(r.gamma) << ','
                << format_double(g.xi) << ',' << r.status << ',' << format_double(r.c2) << ',' << format_double(r.k0)
                << ',' << format_double(r.min_margin) << ',' << format_double(r.at_s) << ',' << format_double(r.jump)
                << ',' << format_double(r.slope_jump) << ',' << format_double(r.integral) << ','
                << format_double(r.bound) << ',' << (r.pass ? 1 : 0) << '\n';
            if (!r.pass) {
                ++failed;
                log << "FAIL tuple " << i << ": f0 = " << format_double(r.f0) << ", delta = " << format_double(r.delta)
                    << ", gamma = " << format_double(r.gamma) << " (" << r.status << ")\n";
            }
        }
        m.text("lemma_results.csv", csv.str());
        if (!worst_s.empty()) {
            std::vector<std::vector<double>> t;
            for (std::size_t i = 0; i < worst_s.size(); ++i) t.push_back({worst_s[i], worst_m[i]});
            m.table("margin_worst.csv", {"s", "margin"}, t);
            m.info()["worst_tuple"] = worst;
            m.info()["worst_margin"] = worst_margin;
        }
        m.info()["tuples"] = rows.size();
        m.info()["failed"] = failed;
        log << "verify-lemmas: " << rows.size() - failed << "/" << rows.size() << " tuples pass\n";
        return failed ? m.finish(exit_check, "lemma check failure") : m.finish(exit_ok, "ok");
    });
}

int cmd_blowup(const Options& opt, std::ostream& log) {
    return guarded(opt, log, [&](const RunConfig& c) {
        const ValidatedParams vp = validate(c.system);
        if (!vp.feasible) {
            log << "infeasible: f0 = " << format_double(c.system.f0) << " does not exceed the threshold "
                << format_double(vp.threshold) << "\n";
            Manifest m(c.output_dir, "blowup", c);
            return m.finish(exit_infeasible, "infeasible");
        }
        const BlowupSpec& b = c.blowup;
        if (!(b.eta > 0.0) || !(b.t0 >= 0.0)) {
            log << "config error: blowup.eta must be positive and blowup.t0 nonnegative\n";
            return int(exit_config);
        }
        const Scenario sc = make_scenario(c);
        const double delta = resolved_delta(c, vp);
        TestFunction seed;
        try {
            seed = build_testfunction(vp, sc.profile, {c.test_function.xi, delta, seed_gamma(c)});
        } catch (const InfeasibleTestFunction& e) {
            log << "config error: " << e.what() << "\n";
            return int(exit_config);
        }

        Manifest m(c.output_dir, "blowup", c);
        const double t1 = b.t0 + 0.5 * b.eta;
        const double t_stop = b.t0 + b.eta;
        const double atom_scale = vp.sphere_area / vp.n();

        // The sweep reaches t1; the finest run is then continued to t0 + eta.
        SolverConfig cfg = c.solver;
        cfg.t_end = std::max(t1, b.trend_time);
        cfg.output_times.clear();
        for (double t : c.solver.output_times)
            if (t > 0.0 && t < cfg.t_end) cfg.output_times.push_back(t);
        cfg.output_times.push_back(b.trend_time);
        cfg.output_times.push_back(t1);
        check_config(cfg, sc.mesh);

        const SweepResult sweep = proper_sweep(sc.vp, *sc.profile, sc.mesh, sc.W0, cfg, b.eps_list, opt.threads);
        json runs = json::array();
        std::string failures;
        for (const auto& run : sweep.runs) {
            if (!run.trajectory) {
                failures += (failures.empty() ? "" : "; ") + run_dir_name(run.epsilon) + ": " + run.error;
                continue;
            }
            write_run(m, run_dir_name(run.epsilon), *run.trajectory, b.betas, atom_scale);
            runs.push_back(run_json(*run.trajectory));
        }
        m.info()["runs"] = runs;
        m.info()["monotonicity"] = monotonicity_json(sweep.report);
        if (!failures.empty()) {
            log << "solver failure: " << failures << "\n";
            return m.finish(exit_solver, "solver failure", failures);
        }
        const Trajectory& finest = *sweep.runs.back().trajectory;
        const double c_sub = b.c_sub.value_or(estimate_c_sub(finest, sc.W0, t1));
        const MassFunction& probe_snap = finest.at_time(t1);

        Selection sel;
        try {
            sel = select_blowup_params({b.t0, b.eta, c.system.c0, c_sub, b.gamma_cap}, seed,
                                       [&](double s) { return probe_snap.at(s); });
        } catch (const SelectionError& e) {
            log << "parameter selection failed (" << e.inequality() << "): " << e.what() << "\n";
            m.info()["selection_error"] = {{"inequality", e.inequality()}, {"message", e.what()}};
            return m.finish(exit_selection, "parameter selection failure", e.what());
        }
        const TestFunction tf = build_testfunction(vp, sc.profile, {c.test_function.xi, delta, sel.gamma});

        // Continuation of the finest run from t1, dense on the Riccati window.
        const double y1 = y_value(probe_snap, tf, vp.mass_cap);
        const Riccati z(tf.rate(), tf.gamma * tf.gamma / (2.0 * tf.K0), y1, t1);
        SolverConfig cont = c.solver;
        cont.epsilon = finest.epsilon;
        cont.step_control = StepControl::adaptive;
        cont.cfl_epsilon.reset();
        cont.t_end = t_stop - t1;
        cont.output_times.clear();
        const double window = std::min(z.blowup_time(), cont.t_end);
        for (std::size_t k = 1; k <= b.dense_outputs; ++k)
            cont.output_times.push_back(window * double(k) / double(b.dense_outputs + 1));
        for (double t : c.solver.output_times)
            if (t > t1 && t < t_stop) cont.output_times.push_back(t - t1);

        MassFunction start = probe_snap;
        start.t = 0.0;
        Trajectory merged;
        try {
            Trajectory tail = solve_regularized(sc.vp, *sc.profile, sc.mesh, start, cont);
            merged.epsilon = finest.epsilon;
            merged.mesh = finest.mesh;
            for (const auto& w : finest.snapshots)
                if (w.t <= t1) merged.snapshots.push_back(w);
            for (std::size_t k = 1; k < tail.snapshots.size(); ++k) {
                MassFunction w = tail.snapshots[k];
                w.t += t1;
                merged.snapshots.push_back(std::move(w));
            }
            merged.dt = tail.dt;
            merged.wall_seconds = tail.wall_seconds;
            m.info()["continuation"] = run_json(tail);
        } catch (const SolverError& e) {
            log << "solver failure in continuation: " << e.what() << "\n";
            return m.finish(exit_solver, "solver failure", e.what());
        }

        BlowupReport report;
        report.betas = b.betas;
        for (const auto& run : sweep.runs) report.runs.push_back(blowup_indicator(*run.trajectory, b.betas, atom_scale));
        assess_trend(report, b.trend_time);
        report.has_selection = true;
        report.selection = sel;
        report.tf = tf;
        report.y = y_functional(merged, tf, vp.mass_cap, sel.kappa, t1);
        report.has_y = true;

        std::vector<std::vector<double>> yrows;
        for (std::size_t k = 0; k < report.y.t.size(); ++k)
            yrows.push_back({report.y.t[k], report.y.y[k], report.y.z[k]});
        m.table("y_functional.csv", {"t", "y", "z"}, yrows);
        m.text("blowup_report.json", to_json(report));
        m.info()["pipeline"] = {{"c_sub", c_sub},
                                {"delta", delta},
                                {"t1", t1},
                                {"k0", tf.k0},
                                {"kappa", sel.kappa},
                                {"gamma", sel.gamma}};

        log << "blowup: kappa = " << format_double(sel.kappa) << ", s0 = " << format_double(sel.s0)
            << ", gamma = " << format_double(sel.gamma) << " (floors " << format_double(sel.gamma_floor_support) << ", "
            << format_double(sel.gamma_floor_kappa) << ")\n";
        log << "blowup: c_sub = " << format_double(c_sub) << ", probe W = " << format_double(sel.probe_W)
            << ", indicator trend " << (report.indicator_trend ? "nondecreasing" : "not monotone")
            << ", lipschitz factor " << format_double(report.lipschitz_factor) << "\n";
        return m.finish(exit_ok, "ok");
    });
}

int cmd_weak_residual(const Options& opt, std::ostream& log) {
    return guarded(opt, log, [&](const RunConfig& c) {
        const Scenario sc = make_scenario(c);
        const int n = sc.vp.n();
        const std::vector<BumpField> fields = c.weak.fields.empty() ? library_fields(n) : c.weak.fields;
        const BumpField flat = constant_state_field(n);

        double t_max = flat.t_end;
        for (const auto& f : fields) t_max = std::max(t_max, f.t_end);
        if (!(c.weak.snapshot_spacing > 0.0)) {
            log << "config error: weak_residual.snapshot_spacing must be positive\n";
            return int(exit_config);
        }
        std::vector<double> outs;
        for (std::size_t k = 1; double(k) * c.weak.snapshot_spacing < t_max; ++k)
            outs.push_back(double(k) * c.weak.snapshot_spacing);

        const Mesh meshes[2] = {sc.mesh, refine(sc.mesh)};
        const Cutoff cut(c.solver.epsilon);
        const double dt = std::min({c.solver.dt, uniform_step(sc.vp, *sc.profile, meshes[0], cut, c.solver.cfl_safety),
                                    2.0 * uniform_step(sc.vp, *sc.profile, meshes[1], cut, c.solver.cfl_safety)});
        Manifest m(c.output_dir, "weak-residual", c);

        std::vector<Trajectory> runs;
        try {
            for (int lvl = 0; lvl < 2; ++lvl) {
                SolverConfig cfg = c.solver;
                cfg.step_control = StepControl::uniform;
                cfg.cfl_epsilon.reset();
                cfg.dt = dt / double(1 << lvl);
                cfg.t_end = t_max;
                cfg.output_times = outs;
                const MassFunction W0 = w0_from_density(RadialDensity::plateau(c.system.c0), n, meshes[lvl]);
                runs.push_back(solve_regularized(sc.vp, *sc.profile, meshes[lvl], W0, cfg));
            }
        } catch (const SolverError& e) {
            log << "solver failure: " << e.what() << "\n";
            return m.finish(exit_solver, "solver failure", e.what());
        }

        // A run with W identically at the cap: only the constant-state field sees it.
        Trajectory capped = runs[0];
        for (auto& w : capped.snapshots) std::fill(w.W.begin(), w.W.end(), sc.vp.mass_cap);
        const WeakResidual rc = weak_residual(capped, flat, *sc.profile);

        std::vector<std::vector<double>> rows;
        bool ok = true;
        for (std::size_t k = 0; k < fields.size(); ++k) {
            const WeakResidual r0 = weak_residual(runs[0], fields[k], *sc.profile);
            const WeakResidual r1 = weak_residual(runs[1], fields[k], *sc.profile);
            const double order = std::log2(r0.value / r1.value);
            ok = ok && order >= 1.0;
            rows.push_back({double(k), fields[k].center, fields[k].half_width, fields[k].t_end, r0.value, r1.value,
                            r0.scale, order});
            log << "field " << k << ": residual " << format_double(r0.value) << " -> " << format_double(r1.value)
                << ", order " << format_double(order) << "\n";
        }
        const bool flat_ok = rc.value <= 1e-8 * rc.scale;
        ok = ok && flat_ok;
        rows.push_back({-1.0, flat.center, flat.half_width, flat.t_end, rc.value, rc.value, rc.scale, NAN});
        log << "constant state: residual " << format_double(rc.value) << " against scale " << format_double(rc.scale)
            << "\n";
        m.table("weak_residual.csv",
                {"field", "center", "half_width", "t_end", "residual_coarse", "residual_fine", "scale", "order"}, rows);
        m.info()["dt_coarse"] = dt;
        m.info()["mesh_N"] = {meshes[0].N(), meshes[1].N()};
        return ok ? m.finish(exit_ok, "ok") : m.finish(exit_check, "residual check failure");
    });
}

}  // namespace ksb::cli

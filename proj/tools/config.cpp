#include "config.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace ksb::cli {

using json = nlohmann::ordered_json;

namespace {

// Tracks which keys of one object were consumed so leftovers can be rejected.
class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
    }

    bool has(const char* key) const { return j_.contains(key); }

    const json& node(const char* key) {
        seen_.insert(key);
        return j_.at(key);
    }

    std::string where(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

    template <class T>
    void req(const char* key, T& out) {
        if (!has(key)) throw ConfigError("missing key " + where(key));
        read(key, out);
    }

    template <class T>
    void opt(const char* key, T& out) {
        if (has(key)) read(key, out);
    }

    template <class T>
    void opt(const char* key, std::optional<T>& out) {
        if (!has(key)) return;
        if (node(key).is_null()) {
            out.reset();
            return;
        }
        T v{};
        read(key, v);
        out = v;
    }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key())) throw ConfigError("unknown key " + where(it.key().c_str()));
    }

private:
    template <class T>
    void read(const char* key, T& out) {
        const json& v = node(key);
        try {
            if constexpr (std::is_same_v<T, double>) {
                if (!v.is_number()) throw ConfigError(where(key) + ": expected a number");
            } else if constexpr (std::is_same_v<T, bool>) {
                if (!v.is_boolean()) throw ConfigError(where(key) + ": expected true or false");
            } else if constexpr (std::is_integral_v<T>) {
                if (!v.is_number_integer()) throw ConfigError(where(key) + ": expected an integer");
                if constexpr (std::is_unsigned_v<T>)
                    if (v.get<long long>() < 0) throw ConfigError(where(key) + ": expected a nonnegative integer");
            } else if constexpr (std::is_same_v<T, std::string>) {
                if (!v.is_string()) throw ConfigError(where(key) + ": expected a string");
            } else if constexpr (std::is_same_v<T, std::vector<double>>) {
                if (!v.is_array()) throw ConfigError(where(key) + ": expected an array of numbers");
                for (const auto& e : v)
                    if (!e.is_number()) throw ConfigError(where(key) + ": expected an array of numbers");
            }
            out = v.get<T>();
        } catch (const json::exception& e) {
            throw ConfigError(where(key) + ": " + e.what());
        }
    }

    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

template <class E>
struct EnumName {
    E value;
    const char* name;
};

constexpr EnumName<Bridge> kBridges[] = {{Bridge::quintic, "quintic"}, {Bridge::exponential, "exponential"}};
constexpr EnumName<Breakpoints> kBreakpoints[] = {{Breakpoints::consistent, "consistent"},
                                                  {Breakpoints::literal, "literal"}};
constexpr EnumName<AdvectionScheme> kSchemes[] = {{AdvectionScheme::upwind, "upwind"},
                                                  {AdvectionScheme::minmod, "minmod"}};
constexpr EnumName<StepControl> kSteps[] = {{StepControl::adaptive, "adaptive"}, {StepControl::uniform, "uniform"}};

template <class E, std::size_t N>
const char* name_of(const EnumName<E> (&table)[N], E v) {
    for (const auto& e : table)
        if (e.value == v) return e.name;
    return "?";
}

template <class E, std::size_t N>
void read_enum(Section& sec, const char* key, const EnumName<E> (&table)[N], E& out) {
    if (!sec.has(key)) return;
    std::string s;
    sec.opt(key, s);
    for (const auto& e : table)
        if (s == e.name) {
            out = e.value;
            return;
        }
    std::string allowed;
    for (const auto& e : table) allowed += std::string(allowed.empty() ? "" : ", ") + e.name;
    throw ConfigError(sec.where(key) + ": \"" + s + "\" is not one of " + allowed);
}

void read_system(Section& sec, SystemParams& p) {
    sec.req("n", p.n);
    sec.req("alpha", p.alpha);
    sec.req("f0", p.f0);
    sec.req("R", p.R);
    sec.req("rho", p.rho);
    sec.req("c0", p.c0);
    sec.finish();
}

void read_solver(Section& sec, SolverConfig& c) {
    sec.opt("epsilon", c.epsilon);
    sec.opt("dt", c.dt);
    sec.opt("t_end", c.t_end);
    read_enum(sec, "scheme", kSchemes, c.scheme);
    read_enum(sec, "step_control", kSteps, c.step_control);
    sec.opt("cfl_safety", c.cfl_safety);
    sec.opt("cfl_epsilon", c.cfl_epsilon);
    sec.opt("output_times", c.output_times);
    sec.opt("support_radius", c.support_radius);
    sec.opt("dt_min", c.dt_min);
    sec.opt("cap_tol", c.cap_tol);
    sec.opt("monotone_tol", c.monotone_tol);
    sec.finish();
}

BumpField read_field(const json& j, const std::string& path, int n) {
    Section sec(j, path);
    BumpField f;
    f.n = n;
    sec.req("center", f.center);
    sec.req("half_width", f.half_width);
    sec.req("t_end", f.t_end);
    sec.opt("amplitude", f.amplitude);
    sec.finish();
    return f;
}

json opt_value(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

RunConfig parse_config(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }
    Section top(root, "");
    RunConfig c;

    if (!top.has("system_params")) throw ConfigError("missing key system_params");
    {
        Section sec(top.node("system_params"), "system_params");
        read_system(sec, c.system);
    }
    if (top.has("testfn_params")) {
        Section sec(top.node("testfn_params"), "testfn_params");
        sec.opt("xi", c.test_function.xi);
        sec.opt("delta", c.test_function.delta);
        sec.opt("gamma", c.test_function.gamma);
        sec.finish();
    }
    if (top.has("mesh")) {
        Section sec(top.node("mesh"), "mesh");
        sec.opt("s_max", c.mesh.s_max);
        sec.opt("N", c.mesh.N);
        sec.opt("ratio", c.mesh.ratio);
        sec.opt("max_first_fraction", c.mesh.max_first_fraction);
        sec.finish();
    }
    if (top.has("signal")) {
        Section sec(top.node("signal"), "signal");
        read_enum(sec, "bridge", kBridges, c.signal.bridge);
        read_enum(sec, "breakpoints", kBreakpoints, c.signal.breakpoints);
        sec.finish();
    }
    if (top.has("solver_config")) {
        Section sec(top.node("solver_config"), "solver_config");
        read_solver(sec, c.solver);
    }
    if (top.has("sweep")) {
        Section sec(top.node("sweep"), "sweep");
        sec.opt("eps_list", c.sweep.eps_list);
        sec.finish();
    }
    if (top.has("lemma_grid")) {
        Section sec(top.node("lemma_grid"), "lemma_grid");
        sec.opt("f0", c.lemmas.f0);
        sec.opt("delta", c.lemmas.delta);
        sec.opt("gamma", c.lemmas.gamma);
        sec.opt("xi", c.lemmas.xi);
        read_enum(sec, "breakpoints", kBreakpoints, c.lemmas.breakpoints);
        sec.opt("grid_points", c.lemmas.grid_points);
        sec.opt("s_lo", c.lemmas.s_lo);
        sec.opt("s_hi", c.lemmas.s_hi);
        sec.opt("write_all_scans", c.lemmas.write_all_scans);
        sec.finish();
    }
    if (top.has("blowup")) {
        Section sec(top.node("blowup"), "blowup");
        sec.opt("t0", c.blowup.t0);
        sec.opt("eta", c.blowup.eta);
        sec.opt("betas", c.blowup.betas);
        sec.opt("eps_list", c.blowup.eps_list);
        sec.opt("c_sub", c.blowup.c_sub);
        sec.opt("gamma_cap", c.blowup.gamma_cap);
        sec.opt("trend_time", c.blowup.trend_time);
        sec.opt("dense_outputs", c.blowup.dense_outputs);
        sec.finish();
    }
    if (top.has("weak_residual")) {
        Section sec(top.node("weak_residual"), "weak_residual");
        if (sec.has("fields")) {
            const json& arr = sec.node("fields");
            if (!arr.is_array()) throw ConfigError("weak_residual.fields: expected an array");
            for (std::size_t i = 0; i < arr.size(); ++i)
                c.weak.fields.push_back(
                    read_field(arr[i], "weak_residual.fields[" + std::to_string(i) + "]", c.system.n));
        }
        sec.opt("snapshot_spacing", c.weak.snapshot_spacing);
        sec.finish();
    }
    top.opt("output_dir", c.output_dir);
    top.finish();
    return c;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string dump_config(const RunConfig& c) {
    json j;
    j["system_params"] = {{"n", c.system.n},   {"alpha", c.system.alpha}, {"f0", c.system.f0},
                          {"R", c.system.R},   {"rho", c.system.rho},     {"c0", c.system.c0}};
    j["testfn_params"] = {{"xi", c.test_function.xi},
                          {"delta", opt_value(c.test_function.delta)},
                          {"gamma", opt_value(c.test_function.gamma)}};
    j["mesh"] = {{"s_max", c.mesh.s_max},
                 {"N", c.mesh.N},
                 {"ratio", c.mesh.ratio},
                 {"max_first_fraction", c.mesh.max_first_fraction}};
    j["signal"] = {{"bridge", name_of(kBridges, c.signal.bridge)},
                   {"breakpoints", name_of(kBreakpoints, c.signal.breakpoints)}};
    const SolverConfig& s = c.solver;
    j["solver_config"] = {{"epsilon", s.epsilon},
                          {"dt", s.dt},
                          {"t_end", s.t_end},
                          {"scheme", name_of(kSchemes, s.scheme)},
                          {"step_control", name_of(kSteps, s.step_control)},
                          {"cfl_safety", s.cfl_safety},
                          {"cfl_epsilon", opt_value(s.cfl_epsilon)},
                          {"output_times", s.output_times},
                          {"support_radius", s.support_radius},
                          {"dt_min", s.dt_min},
                          {"cap_tol", s.cap_tol},
                          {"monotone_tol", s.monotone_tol}};
    j["sweep"] = {{"eps_list", c.sweep.eps_list}};
    const LemmaGrid& g = c.lemmas;
    j["lemma_grid"] = {{"f0", g.f0},
                       {"delta", g.delta},
                       {"gamma", g.gamma},
                       {"xi", g.xi},
                       {"breakpoints", name_of(kBreakpoints, g.breakpoints)},
                       {"grid_points", g.grid_points},
                       {"s_lo", g.s_lo},
                       {"s_hi", g.s_hi},
                       {"write_all_scans", g.write_all_scans}};
    const BlowupSpec& b = c.blowup;
    j["blowup"] = {{"t0", b.t0},
                   {"eta", b.eta},
                   {"betas", b.betas},
                   {"eps_list", b.eps_list},
                   {"c_sub", opt_value(b.c_sub)},
                   {"gamma_cap", b.gamma_cap},
                   {"trend_time", b.trend_time},
                   {"dense_outputs", b.dense_outputs}};
    json fields = json::array();
    for (const auto& f : c.weak.fields)
        fields.push_back(
            {{"center", f.center}, {"half_width", f.half_width}, {"t_end", f.t_end}, {"amplitude", f.amplitude}});
    j["weak_residual"] = {{"fields", fields}, {"snapshot_spacing", c.weak.snapshot_spacing}};
    j["output_dir"] = c.output_dir;
    return j.dump(2) + "\n";
}

}  // namespace ksb::cli

#pragma once

#include "ksb/params.hpp"
#include "ksb/signal.hpp"
#include "ksb/solver.hpp"
#include "ksb/weak.hpp"

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ksb::cli {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct MeshSpec {
    double s_max = 4.0;
    std::size_t N = 512;
    double ratio = 1.0241;
    double max_first_fraction = kMaxFirstSpacing;
};

struct SignalSpec {
    Bridge bridge = Bridge::quintic;
    Breakpoints breakpoints = Breakpoints::consistent;
};

struct TestFnSpec {
    double xi = 4.0;
    std::optional<double> delta;  ///< midpoint of (delta bound, 1) when absent
    std::optional<double> gamma;
};

struct SweepSpec {
    std::vector<double> eps_list;  ///< empty: single run at solver.epsilon
};

struct LemmaGrid {
    std::vector<double> f0{2.0, 2.5, 3.0, 4.0, 6.0};
    std::vector<double> delta{0.8, 0.85, 0.9, 0.95};
    std::vector<double> gamma{10.5, 20.0, 50.0, 100.0, 1000.0};
    double xi = 4.0;
    Breakpoints breakpoints = Breakpoints::literal;
    std::size_t grid_points = 10000;
    double s_lo = 1e-8;
    double s_hi = 10.0;
    bool write_all_scans = false;
};

struct BlowupSpec {
    double t0 = 0.0;
    double eta = 0.1;
    std::vector<double> betas{1.0, 2.0};
    std::vector<double> eps_list{1e-2, 1e-3, 1e-4};
    std::optional<double> c_sub;
    double gamma_cap = 1152921504606846976.0;
    double trend_time = 0.01;
    std::size_t dense_outputs = 40;
};

struct WeakSpec {
    std::vector<BumpField> fields;  ///< empty: the built-in library
    double snapshot_spacing = 1e-4;
};

struct RunConfig {
    SystemParams system;
    TestFnSpec test_function;
    MeshSpec mesh;
    SignalSpec signal;
    SolverConfig solver;
    SweepSpec sweep;
    LemmaGrid lemmas;
    BlowupSpec blowup;
    WeakSpec weak;
    std::string output_dir = "out";
};

/// Strict parse: every object key must be known, and the system section must
/// list all six parameters. Throws ConfigError naming the offending path.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

/// Full serialization; parse_config(dump_config(c)) reproduces c.
std::string dump_config(const RunConfig& config);

}  // namespace ksb::cli

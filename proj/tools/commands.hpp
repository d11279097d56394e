#pragma once

#include "config.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>

namespace ksb::cli {

/// Stable process exit codes.
enum Exit : int {
    exit_ok = 0,
    exit_config = 1,
    exit_infeasible = 2,
    exit_solver = 3,
    exit_check = 4,
    exit_selection = 5,
};

struct Options {
    std::filesystem::path config;
    std::optional<std::filesystem::path> out;  ///< overrides output_dir
    unsigned threads = 1;
};

int cmd_validate(const Options& opt, std::ostream& log);
int cmd_simulate(const Options& opt, std::ostream& log);
int cmd_verify_lemmas(const Options& opt, std::ostream& log);
int cmd_blowup(const Options& opt, std::ostream& log);
int cmd_weak_residual(const Options& opt, std::ostream& log);

/// "snapshot_t<time>.csv" with the time printed to 10 significant digits.
std::string snapshot_name(double t);
/// "run_eps_<eps>" with epsilon printed to 6 significant digits.
std::string run_dir_name(double eps);

}  // namespace ksb::cli

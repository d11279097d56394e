#include "commands.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    using namespace ksb::cli;
    CLI::App app{"ksblow: radial Keller-Segel blow-up toolkit"};
    app.require_subcommand(1);

    Options opt;
    std::string out;
    const struct {
        const char* name;
        const char* help;
        int (*run)(const Options&, std::ostream&);
    } commands[] = {
        {"validate", "check parameters and print the feasibility report", cmd_validate},
        {"simulate", "run the regularized solver or an epsilon sweep", cmd_simulate},
        {"verify-lemmas", "certify the test-function inequalities over a grid", cmd_verify_lemmas},
        {"blowup", "run the parameter-selection and blow-up pipeline", cmd_blowup},
        {"weak-residual", "measure weak-formulation residuals under refinement", cmd_weak_residual},
    };
    for (const auto& c : commands) {
        auto* sub = app.add_subcommand(c.name, c.help);
        sub->add_option("--config", opt.config, "JSON run configuration")->required();
        sub->add_option("--out", out, "output directory (overrides output_dir)");
        sub->add_option("--threads", opt.threads, "worker threads for epsilon sweeps")->check(CLI::PositiveNumber);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_config;
    }
    if (!out.empty()) opt.out = out;

    for (const auto& c : commands)
        if (app.got_subcommand(c.name)) {
            try {
                return c.run(opt, std::cout);
            } catch (const std::exception& e) {
                std::cerr << "error: " << e.what() << "\n";
                return exit_solver;
            }
        }
    return exit_config;
}

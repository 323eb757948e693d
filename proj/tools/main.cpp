// fujitalab command line: pseudospectral experiments on the semilinear
// polyharmonic heat equation u_t + (-Lap)^m u = |u|^p with data eps*u0.

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "fujitalab/runner.hpp"

namespace {

struct VerbArgs {
    std::string config_path;
    std::vector<std::string> overrides;
    std::string out_dir;
};

void add_verb(CLI::App& app, const std::string& name, const std::string& desc,
              VerbArgs& args, int& exit_code) {
    CLI::App* sub = app.add_subcommand(name, desc);
    sub->add_option("-c,--config", args.config_path, "sectioned key=value config file")
        ->required();
    sub->add_option("--set", args.overrides,
                    "override a config value, e.g. --set problem.epsilon=0.2");
    sub->add_option("-o,--output", args.out_dir, "output directory (overrides config)");
    sub->callback([&args, &exit_code, name] {
        fujitalab::Config cfg = fujitalab::parse_config_file(args.config_path);
        for (const auto& ov : args.overrides) fujitalab::apply_override(cfg, ov);
        if (!args.out_dir.empty()) cfg.out_dir = args.out_dir;
        fujitalab::validate_config(cfg);
        exit_code = fujitalab::run_command(name, cfg);
    });
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fujitalab: blow-up lifespan laboratory for u_t + (-Lap)^m u = |u|^p"};
    app.set_version_flag("--version", fujitalab::kToolVersion);
    app.require_subcommand(1);

    VerbArgs args;
    int exit_code = fujitalab::kExitOk;
    add_verb(app, "simulate", "evolve one problem instance and export the trajectory",
             args, exit_code);
    add_verb(app, "sweep", "epsilon sweep with domain convergence and scaling-law fit",
             args, exit_code);
    add_verb(app, "kernel", "emit polyharmonic heat kernel profiles", args, exit_code);
    add_verb(app, "decay-check", "fit the L^p -> L^q smoothing exponent", args, exit_code);
    add_verb(app, "testfn-verify", "certify the cutoff machinery on a simulated run",
             args, exit_code);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const fujitalab::ConfigError& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return fujitalab::kExitConfigError;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return exit_code;
}

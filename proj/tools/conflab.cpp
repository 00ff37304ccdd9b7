// conflab <invariance|geodesic|flow|inequalities|fuzz> --config <path> --out <dir>
//         [--seed S] [--n N] [--grid K]

#include <CLI11.hpp>
#include <fmt/format.h>

#include <iostream>

#include "conflab/config.hpp"
#include "conflab/errors.hpp"
#include "conflab/experiments.hpp"

int main(int argc, char** argv) {
    using namespace conflab;
    CLI::App app{"Numerical experiments for conformal factors on even-dimensional round spheres"};
    std::string command, config_path, out_dir;
    std::uint64_t seed = 0;
    int n = 0, grid = 0;
    app.add_option("command", command, "invariance, geodesic, flow, inequalities or fuzz")
        ->required()
        ->check(CLI::IsMember({"invariance", "geodesic", "flow", "inequalities", "fuzz"}));
    app.add_option("--config", config_path, "key = value configuration file")->required();
    app.add_option("--out", out_dir, "output directory")->required();
    auto* seed_opt = app.add_option("--seed", seed, "base seed");
    auto* n_opt = app.add_option("--n", n, "sphere dimension (even, >= 4)");
    auto* grid_opt = app.add_option("--grid", grid, "grid nodes (odd, >= 33); replaces every per-section N");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitConfigError;
    }

    ExperimentConfig cfg;
    try {
        cfg = load_config(config_path);
        if (*seed_opt) cfg.general.seed = seed;
        if (*n_opt) {
            if (n < 4 || n % 2 != 0) throw ConfigError("--n must be even and >= 4");
            cfg.general.m = n / 2;
        }
        if (*grid_opt) {
            cfg.general.N = grid;
            cfg.invariance.N = cfg.geodesic.N = cfg.flow.N = cfg.inequalities.N = 0;
            cfg.geodesic.bvp_N = cfg.flow.length_N = grid;
        }
        cfg.validate();
    } catch (const ConfigError& e) {
        std::cerr << e.what() << "\n";
        return kExitConfigError;
    }

    try {
        const CommandResult r = run_command(command, cfg);
        write_outputs(out_dir, r);
        std::cout << fmt::format("{}: {} (exit {})\n", command, r.summary.value("status", "?"), r.exit_code);
        return r.exit_code;
    } catch (const ConeError& e) {
        std::cerr << "cone exit: " << e.what() << "\n";
        return kExitConeExit;
    } catch (const ConfigError& e) {
        std::cerr << e.what() << "\n";
        return kExitConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBreach;
    }
}

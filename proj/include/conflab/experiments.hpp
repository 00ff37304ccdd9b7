#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "conflab/config.hpp"
#include "conflab/flows.hpp"
#include "conflab/io.hpp"

namespace conflab {

enum ExitCode : int {
    kExitPass = 0,
    kExitBreach = 1,
    kExitConeExit = 2,
    kExitNoConvergence = 3,
    kExitConfigError = 4,
};

struct CommandResult {
    int exit_code = kExitPass;
    json summary;
    MonitorTrace trace; // empty for commands without a time axis
    std::optional<GeometryState> final_state;
    std::map<std::string, std::string> extra_files; // name -> content
};

// u = sum_{k=1..modes} c_k cos(k theta) with c_k uniform in [-1, 1] / k^2,
// rescaled so that sum |c_k| <= amplitude. Draws come from the stream
// stream_seed(seed, index). With require_cone the draw is repeated (same
// stream) until the profile is strictly inside the admissible cone, both
// pointwise and for the discrete cell model.
Vec random_profile(const SphereConfig& cfg, double amplitude, int modes, std::uint64_t seed,
                   std::uint64_t index, bool require_cone);

CommandResult cmd_invariance(const ExperimentConfig& c);
CommandResult cmd_geodesic(const ExperimentConfig& c);
CommandResult cmd_flow(const ExperimentConfig& c);
CommandResult cmd_inequalities(const ExperimentConfig& c);
CommandResult cmd_fuzz(const ExperimentConfig& c);

// Dispatches by name; throws ConfigError for an unknown command.
CommandResult run_command(const std::string& name, const ExperimentConfig& c);

// summary.json, trace.csv, state_final.csv and any extra files, each written
// atomically.
void write_outputs(const std::filesystem::path& dir, const CommandResult& r);

} // namespace conflab

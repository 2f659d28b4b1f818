#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "dglmc/config.hpp"

namespace dglmc {

/// A parsed command-line invocation. The binary maps argv onto this struct;
/// tests drive the same entry points in-process.
struct CliInvocation {
  std::string command;  // generate | run | bounds | compare
  std::string config_path;
  std::optional<std::uint64_t> seed;   // overrides run.seed
  std::optional<std::string> out_dir;  // overrides output.dir
  bool override_validation = false;
};

/// Dispatches to the matching cmd_* function. Prints errors to stderr and
/// returns a nonzero exit code instead of throwing.
int run_cli(const CliInvocation& invocation);

// Individual subcommands; throw on invalid input.
void cmd_generate(const ExperimentConfig& config);
void cmd_run(const ExperimentConfig& config, bool override_validation);
void cmd_bounds(const ExperimentConfig& config);
void cmd_compare(const ExperimentConfig& config);

/// Loads the config file and applies --seed/--out overrides.
ExperimentConfig load_cli_config(const CliInvocation& invocation);

}  // namespace dglmc

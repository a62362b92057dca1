#pragma once

#include <optional>
#include <string>
#include <vector>

namespace turnpike {

/// Options shared by the CLI subcommands. Exit codes: 0 success, 1 error
/// (bad config, solver failure), 2 verification failure.
struct CliOptions {
  std::string config_path;
  std::optional<std::string> out_dir;  // overrides output_dir from the config
  std::optional<unsigned> seed;        // power-method seed override
  bool quiet = false;
  std::vector<double> gammas;  // sweep override, ascending
};

int run_scenario(const CliOptions& opts);
int verify_scenario(const CliOptions& opts);
int sweep_scenario(const CliOptions& opts);

}  // namespace turnpike

#include <CLI11.hpp>

#include <string>
#include <vector>

#include "turnpike/scenario.hpp"

int main(int argc, char** argv) {
  CLI::App app{"finite-time turnpike experiment harness"};
  app.require_subcommand(1);

  turnpike::CliOptions opts;
  std::string out_dir;
  unsigned seed = 0;
  bool have_seed = false;

  const auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("config", opts.config_path, "scenario config (JSON)")->required();
    cmd->add_option("--out", out_dir, "output directory override");
    cmd->add_option("--seed", seed, "power-method seed override")->each([&](const std::string&) {
      have_seed = true;
    });
    cmd->add_flag("--quiet", opts.quiet, "suppress progress output");
  };

  CLI::App* run = app.add_subcommand("run", "run a scenario and write CSV/SVG outputs");
  add_common(run);
  CLI::App* verify = app.add_subcommand("verify", "run the scenario's acceptance checks");
  add_common(verify);
  CLI::App* sweep = app.add_subcommand("sweep", "sweep the tracking weight over a gamma grid");
  add_common(sweep);
  std::string gammas_arg;
  sweep->add_option("--gammas", gammas_arg, "comma-separated gamma grid, ascending");

  CLI11_PARSE(app, argc, argv);

  if (!out_dir.empty()) opts.out_dir = out_dir;
  if (have_seed) opts.seed = seed;
  if (!gammas_arg.empty()) {
    std::stringstream ss(gammas_arg);
    std::string item;
    while (std::getline(ss, item, ',')) opts.gammas.push_back(std::stod(item));
  }

  if (run->parsed()) return turnpike::run_scenario(opts);
  if (verify->parsed()) return turnpike::verify_scenario(opts);
  return turnpike::sweep_scenario(opts);
}

#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "risres/experiment.hpp"

namespace {

struct CommonFlags {
  std::string config_path;
  std::string out_dir;
  std::string ignore_branch;
  bool uncapped = false;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path,
                  "experiment description (INI)")
      ->required();
  cmd->add_option("--out", flags.out_dir,
                  "output directory (overrides [output] dir)");
  cmd->add_option("--ignore-branch", flags.ignore_branch,
                  "behavior when a disruption is tolerated instead of "
                  "recovered")
      ->check(CLI::IsMember({"stale", "reoptimize"}));
  cmd->add_flag("--uncapped-metrics", flags.uncapped,
                "report rate ratios without the cap at 1");
}

risres::experiment::ExperimentSpec load_with(const CommonFlags& flags) {
  auto spec = risres::experiment::load_spec(flags.config_path);
  if (!flags.out_dir.empty()) spec.output_dir = flags.out_dir;
  if (flags.ignore_branch == "stale") {
    spec.system.ignore_policy = risres::IgnorePolicy::kStaleBeamformers;
  } else if (flags.ignore_branch == "reoptimize") {
    spec.system.ignore_policy = risres::IgnorePolicy::kReoptimize;
  }
  if (flags.uncapped) spec.system.capped_metrics = false;
  return spec;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "resilience simulator for a RIS-assisted cell-free MIMO downlink"};
  app.require_subcommand(1);

  CommonFlags run_flags;
  std::uint64_t seed = 0;
  auto* run = app.add_subcommand("run", "simulate one disruption episode");
  add_common(run, run_flags);
  auto* seed_opt =
      run->add_option("--seed", seed, "RNG seed (overrides rng_seed)");

  CommonFlags sweep_flags;
  int jobs = 0;
  bool no_plots = false;
  auto* sweep = app.add_subcommand(
      "sweep", "episode grid over blocklength, RIS size and seeds");
  add_common(sweep, sweep_flags);
  sweep->add_option("--jobs", jobs, "parallel episodes (0 = all cores)");
  sweep->add_flag("--no-plots", no_plots, "skip the SVG charts");

  std::string validate_path;
  auto* validate = app.add_subcommand(
      "validate", "check a config and print its resolved form");
  validate->add_option("--config", validate_path,
                       "experiment description (INI)")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      auto spec = load_with(run_flags);
      if (seed_opt->count() > 0) spec.system.rng_seed = seed;
      return risres::experiment::cmd_run(spec, std::cout);
    }
    if (sweep->parsed()) {
      auto spec = load_with(sweep_flags);
      if (no_plots) spec.emit_plots = false;
      return risres::experiment::cmd_sweep(spec, jobs, std::cout);
    }
    const auto spec = risres::experiment::load_spec(validate_path);
    return risres::experiment::cmd_validate(spec, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

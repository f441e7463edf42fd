#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "hda_cli/commands.hpp"

int main(int argc, char** argv) {
  using namespace hda::cli;

  CLI::App app{"Two-view hazard detection: scene generation, pipeline runs, Monte Carlo and profiling"};
  app.require_subcommand(1);

  std::string spec_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  int reps = 0;
  bool debug_dumps = false;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--spec", spec_path, "Experiment spec (JSON)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--out", out_dir, "Output directory (overrides output_dir)");
    cmd->add_option("--seed", seed, "Master seed (overrides seed)");
    cmd->add_option("--threads", threads, "Worker threads, 0 for all cores");
  };

  CLI::App* generate = app.add_subcommand("generate", "Render an image pair with nav and truth products");
  CLI::App* run = app.add_subcommand("run", "Run hazard detection on an image pair");
  CLI::App* mc = app.add_subcommand("mc", "Monte Carlo slope observability sweep");
  CLI::App* profile = app.add_subcommand("profile", "Stage timing over image sizes");
  for (CLI::App* cmd : {generate, run, mc, profile}) add_common(cmd);
  run->add_flag("--debug-dumps", debug_dumps, "Write per-ROI keypoints, matches and point clouds");
  profile->add_option("--reps", reps, "Repetitions per pair")->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  ExperimentSpec spec;
  try {
    spec = load_experiment(spec_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }

  Overrides overrides;
  overrides.debug_dumps = debug_dumps;
  CLI::App* cmd = app.get_subcommands().front();
  if (cmd->count("--out")) overrides.out = out_dir;
  if (cmd->count("--seed")) overrides.seed = seed;
  if (cmd->count("--threads")) overrides.threads = threads;
  if (cmd == profile && profile->count("--reps")) overrides.reps = reps;
  apply_overrides(spec, overrides);

  if (cmd == generate) return cmd_generate(spec, std::cout, std::cerr);
  if (cmd == run) return cmd_run(spec, debug_dumps, std::cout, std::cerr);
  if (cmd == mc) return cmd_mc(spec, std::cout, std::cerr);
  return cmd_profile(spec, std::cout, std::cerr);
}

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>

#include "hda_cli/spec.hpp"

namespace hda::cli {

// Process exit codes.
enum ExitCode : int { kExitOk = 0, kExitFailure = 1, kExitNoSafeSite = 2 };

// Command-line overrides applied on top of the spec file.
struct Overrides {
  std::optional<std::filesystem::path> out;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::optional<int> reps;
  bool debug_dumps = false;
};

void apply_overrides(ExperimentSpec& spec, const Overrides& overrides);

// Each command writes into spec.output_dir, reports progress on `log` and
// diagnostics on `err`, and returns an ExitCode.
int cmd_generate(const ExperimentSpec& spec, std::ostream& log, std::ostream& err);
int cmd_run(const ExperimentSpec& spec, bool debug_dumps, std::ostream& log, std::ostream& err);
int cmd_mc(const ExperimentSpec& spec, std::ostream& log, std::ostream& err);
int cmd_profile(const ExperimentSpec& spec, std::ostream& log, std::ostream& err);

// Maps a finished pipeline run to the process exit code.
int exit_code_for(const HdaResult& result);

}  // namespace hda::cli

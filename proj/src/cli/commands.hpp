#pragma once

// Subcommands. Each returns its exit status, a JSON report, and the files it wrote.

#include <filesystem>
#include <string>
#include <vector>

#include "cli/config.hpp"
#include "spheretop/io.hpp"

namespace spheretop::cli {

struct CommandOutcome {
  int exit_code = kExitOk;
  io::Json report;
  std::vector<std::filesystem::path> files;
  std::string message;  ///< first hard failure, or empty
};

struct CheckResult {
  std::string name;
  bool passed = false;
  double value = 0.0;       ///< residual or measured quantity
  double tolerance = 0.0;
  bool informational = false;  ///< reported, never fails the run
  std::string note;
};

/// The verification battery; a run passes iff every non-informational check passes.
std::vector<CheckResult> verification_checks(const RunConfig& config);
io::Json verification_report(const std::vector<CheckResult>& checks, const RunConfig& config);

/// Maupertuis energy: 2 max V when max V > 0, otherwise max V + 1.
double default_maupertuis_energy(const Params& p);

CommandOutcome cmd_verify(const RunConfig& config);
CommandOutcome cmd_simulate(const RunConfig& config);
CommandOutcome cmd_section(const RunConfig& config, unsigned threads);
CommandOutcome cmd_curvature(const RunConfig& config);
CommandOutcome cmd_geodesic(const RunConfig& config);

/// Dispatch on config.command. Config and domain errors map to exit 2, other failures to exit 3.
CommandOutcome run_command(const RunConfig& config, unsigned threads);

}  // namespace spheretop::cli

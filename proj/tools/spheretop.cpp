#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "cli/commands.hpp"
#include "cli/config.hpp"
#include "spheretop/errors.hpp"

using namespace spheretop::cli;

int main(int argc, char** argv) {
  CLI::App app{"Integrable top on the sphere with a cubic integral: verification and experiments"};
  app.set_help_flag("--help", "print this help and exit");
  app.require_subcommand(1);

  std::optional<std::string> config_path;
  Overrides ov;
  std::optional<std::string> out;
  app.add_option("--config", config_path, "JSON run configuration");
  app.add_option("--out", out, "output directory");
  app.add_option("--seed", ov.seed, "random seed");
  app.add_option("--dt", ov.dt, "time step");
  app.add_option("--t-end", ov.t_end, "integration horizon (negative: backward)");
  app.add_option("--s", ov.s, "shape parameter, s > 1");
  app.add_option("--A", ov.A, "coupling A");
  app.add_option("--c", ov.c, "coupling c");
  app.add_option("--h", ov.h, "energy of the Maupertuis geodesic family");
  app.fallthrough();

  app.add_subcommand("verify", "run the verification battery and write a JSON report");
  app.add_subcommand("simulate", "integrate one orbit and write the trajectory with its drift summary");
  app.add_subcommand("section", "Poincare section points, one file per seed");
  app.add_subcommand("curvature", "curvature profiles and kinetic positivity on a theta grid");
  app.add_subcommand("geodesic", "check the Maupertuis geodesic correspondence along one orbit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfigError;
  }

  const Command command = parse_command(app.get_subcommands().front()->get_name());
  if (out) ov.out = *out;
  RunConfig config;
  try {
    config = load_config(command, config_path ? std::optional<std::filesystem::path>(*config_path) : std::nullopt, ov);
  } catch (const spheretop::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const spheretop::DomainError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  }

  const CommandOutcome outcome = run_command(config, thread_cap());
  std::cout << outcome.report.dump(2) << "\n";
  for (const auto& f : outcome.files) std::cerr << "wrote " << f.string() << "\n";
  if (!outcome.message.empty()) std::cerr << outcome.message << "\n";
  return outcome.exit_code;
}

#pragma once

// Run configuration: one JSON document per run, validated before any
// computation. Unknown keys are rejected. Command-line flags override
// the matching scalar fields.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "spheretop/dynamics.hpp"
#include "spheretop/geometry.hpp"
#include "spheretop/io.hpp"
#include "spheretop/model.hpp"
#include "spheretop/reference_gc.hpp"

namespace spheretop::cli {

enum class Command { verify, simulate, section, curvature, geodesic };

std::string to_string(Command c);
/// Throws ConfigError for an unknown name.
Command parse_command(const std::string& name);

inline constexpr int kExitOk = 0;
inline constexpr int kExitVerificationFailure = 1;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitRuntimeError = 3;

/// Section seed; p_phi is completed on the energy level when omitted, phi defaults to phi_star.
struct SeedSpec {
  double theta = 0.0;
  std::optional<double> phi;
  double p_theta = 0.0;
  std::optional<double> p_phi;
};

struct Grids {
  std::size_t identity_samples = 10000;
  std::size_t bracket_states = 1000;
  std::size_t degree_basepoints = 100;
  std::size_t chart_points = 1000;
  std::size_t positivity_points = 10000;
  std::size_t eigen_grid = 200;     ///< eigen_grid x eigen_grid position grid
  std::size_t curvature_points = 181;
  std::size_t sign_states = 1000;
};

struct GeodesicStart {
  double theta = 1.2;
  double phi = 0.3;
  double p_theta = 0.4;
};

enum class OutputFormat { csv, json, both };

struct Output {
  std::filesystem::path dir = "out";
  OutputFormat format = OutputFormat::both;
  bool csv() const { return format != OutputFormat::json; }
  bool json() const { return format != OutputFormat::csv; }
};

struct RunConfig {
  Command command = Command::verify;
  std::uint64_t seed = 42;
  Params params{1.0, 0.0, 2.0};
  GCParams gc;
  std::optional<double> h;  ///< Maupertuis energy; default 2 max V
  IntegratorConfig integrator;
  io::AnyState initial = SphericalState{1.2, 0.3, 0.4, 0.6};
  SectionConfig section;
  std::vector<SeedSpec> seeds;
  Grids grids;
  GeodesicStart geodesic;
  std::vector<MetricKind> metrics{MetricKind::round, MetricKind::new_system, MetricKind::goryachev_chaplygin,
                                  MetricKind::geodesic_maupertuis};
  Output output;
};

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<double> dt;
  std::optional<double> t_end;
  std::optional<double> s;
  std::optional<double> A;
  std::optional<double> c;
  std::optional<double> h;
  std::optional<std::filesystem::path> out;
};

/// Command defaults (integrator step and horizon, section seeds).
RunConfig default_config(Command command);

/// Validate and apply `document` on top of the command defaults, then the overrides.
/// Throws ConfigError naming the offending key or constraint.
RunConfig parse_config(Command command, const io::Json& document, const Overrides& overrides = {});
/// Reads the file when given; an absent path means the defaults.
RunConfig load_config(Command command, const std::optional<std::filesystem::path>& path,
                      const Overrides& overrides = {});

/// Worker cap: SPHERETOP_THREADS when set to a positive integer, else the hardware concurrency.
unsigned thread_cap();

}  // namespace spheretop::cli

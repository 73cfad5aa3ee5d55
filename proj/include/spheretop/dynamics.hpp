#pragma once

// Time integration: implicit midpoint in the canonical charts with automatic
// switching between the spherical and pole charts, conservation monitoring,
// an explicit RK4 control integrator in the global chart, and Poincare
// sections on phi = const.

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "spheretop/charts.hpp"
#include "spheretop/errors.hpp"
#include "spheretop/model.hpp"

namespace spheretop {

struct IntegratorConfig {
  double dt = 1e-3;
  double t_end = 1.0;              ///< negative values integrate backwards in time
  double tolerance = 1e-14;        ///< fixed-point increment, relative to max(1, |u_i|)
  int max_iterations = 50;
  double switch_low = 0.8;         ///< pole chart -> spherical when |z| < switch_low
  double switch_high = 0.9;        ///< spherical -> pole chart when |z| > switch_high
  std::size_t stride = 1;          ///< record every stride-th step (the last step is always recorded)

  /// Throws ConfigError on dt <= 0, tolerance <= 0, a band outside (0, 1), stride 0, or a non-finite t_end.
  void validate() const;
  /// Number of steps, |t_end| / dt rounded to the nearest integer.
  std::size_t steps() const;
};

struct Sample {
  double t = 0.0;
  GlobalState state;
  double H = 0.0;
  double F = 0.0;
};

struct SlopeFit {
  double slope = 0.0;
  double standard_error = 0.0;
  /// |slope| > 3 standard errors.
  bool secular = false;
};

struct DriftSummary {
  double max_relative_H = 0.0;  ///< max |H(t) - H(0)| / max(|H(0)|, 1)
  double max_relative_F = 0.0;
  SlopeFit H_slope;             ///< fitted slope of the relative deviation over time
  SlopeFit F_slope;
};

struct Trajectory {
  std::vector<Sample> samples;
  DriftSummary drift;
  double max_casimir_residual = 0.0;       ///< before projection onto the Casimir level
  std::size_t chart_switches = 0;
  double max_switch_discontinuity = 0.0;   ///< global-chart distance across each switch
  int max_fixed_point_iterations = 0;
};

/// Integrator failure; carries everything computed before the failing step.
class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(const std::string& what, Trajectory partial, double residual, std::size_t step)
      : std::runtime_error(what), partial_(std::move(partial)), residual_(residual), step_(step) {}

  const Trajectory& partial() const noexcept { return partial_; }
  double residual() const noexcept { return residual_; }
  std::size_t step() const noexcept { return step_; }

 private:
  Trajectory partial_;
  double residual_;
  std::size_t step_;
};

struct StepResult {
  CanonicalState state;
  int iterations = 0;
  double residual = 0.0;  ///< last fixed-point increment
};

/// One implicit-midpoint step in the state's chart. dt may be negative.
/// Throws ConvergenceError when the fixed-point iteration does not converge.
StepResult step_implicit_midpoint_detailed(const CanonicalState& state, double dt, const Params& p,
                                           double tolerance = 1e-14, int max_iterations = 50);
CanonicalState step_implicit_midpoint(const CanonicalState& state, double dt, const Params& p,
                                      double tolerance = 1e-14, int max_iterations = 50);

/// Chart in which integration of a given state starts or continues.
CanonicalState choose_chart(const CanonicalState& state, const IntegratorConfig& config);
CanonicalState choose_chart(const GlobalState& state, const IntegratorConfig& config);

Trajectory integrate(const CanonicalState& initial, const Params& p, const IntegratorConfig& config);
Trajectory integrate(const GlobalState& initial, const Params& p, const IntegratorConfig& config);

/// Classical RK4 on the Lie-Poisson equations; not symplectic, used as a control.
/// Recorded states are projected onto the Casimir level, the evolved state is not.
Trajectory integrate_rk4_global(const GlobalState& initial, const Params& p, const IntegratorConfig& config);

/// Drift summary. The slope fit is an OLS line through 10 block means of the
/// relative deviation, which removes most of the autocorrelation of the raw samples.
DriftSummary drift_report(const std::vector<Sample>& samples);
DriftSummary drift_report(const Trajectory& trajectory);

/// Real roots p_phi of H(theta, phi, p_theta, p_phi) = E, ascending.
/// Empty when E is below the pointwise minimum; a single entry for a double root.
std::vector<double> solve_momentum_on_energy(double theta, double p_theta, double phi, double E, const Params& p);

struct SectionConfig {
  double phi_star = 0.0;
  double energy = 0.0;
  double tolerance = 1e-12;       ///< on |sin(phi - phi_star)| at refined crossings
  /// Seeds farther than this from the energy level are infeasible; a crossing
  /// farther than this ends the run with status failed.
  double energy_tolerance = 1e-8;
};

struct SectionPoint {
  std::size_t index = 0;
  double t = 0.0;
  double theta = 0.0;
  double p_theta = 0.0;
  double energy_residual = 0.0;  ///< |H - E|
};

enum class SectionStatus { ok, infeasible, no_crossing, failed };

std::string to_string(SectionStatus s);

struct SectionResult {
  SectionStatus status = SectionStatus::ok;
  std::string message;
  std::vector<SectionPoint> points;
};

/// Crossings of phi = phi_star with d(phi)/dt > 0, one result per seed. Points found
/// before a failure are kept.
/// Seeds are independent and processed on up to `threads` worker threads.
std::vector<SectionResult> poincare_section(const std::vector<SphericalState>& seeds, const Params& p,
                                            const SectionConfig& section, const IntegratorConfig& config,
                                            unsigned threads = 1);

/// For A = 0 the section points of one orbit lie on
/// g(theta, p_theta) = p_theta^2 / 2 + C(theta) q / 2 + V(theta) - E = 0 with q = p_phi^2.
/// Fits q by least squares and returns the largest first-order distance |g| / |grad g|.
/// Throws DomainError for A != 0 or fewer than 2 points.
double integrable_curve_thickness(const std::vector<SectionPoint>& points, double E, const Params& p);

}  // namespace spheretop

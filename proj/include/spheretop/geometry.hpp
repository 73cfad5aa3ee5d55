#pragma once

// Surface metrics on the sphere, Gaussian curvature, positivity of the
// kinetic energy, the maximum of the potential, and the Maupertuis geodesic
// system (H_geod, F_geod) with its sign-variant resolution.

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "spheretop/bracket.hpp"
#include "spheretop/charts.hpp"
#include "spheretop/dual.hpp"
#include "spheretop/dynamics.hpp"
#include "spheretop/model.hpp"

namespace spheretop {

// ---- metrics ---------------------------------------------------------------

enum class MetricKind { round, new_system, goryachev_chaplygin, geodesic_maupertuis, gc_geodesic };

std::string to_string(MetricKind k);

/// ds^2 = rho(theta, phi) (d theta^2 + f(theta)^2 d phi^2).
struct MetricProfile {
  MetricKind kind = MetricKind::round;
  Params params;       ///< new_system, geodesic_maupertuis
  double A1 = 0.0;     ///< gc_geodesic
  double h = 0.0;      ///< energy of the conformal factor (geodesic kinds)

  /// f(theta)^2.
  template <class T>
  T profile_squared(const T& theta) const {
    using std::cos;
    using std::sin;
    using std::tan;
    const T sn = sin(theta);
    switch (kind) {
      case MetricKind::round: return sn * sn;
      case MetricKind::new_system:
      case MetricKind::geodesic_maupertuis:
        return 1.0 / (1.0 / (sn * sn) + structure::inertia_correction(T(cos(theta)), params.s));
      case MetricKind::goryachev_chaplygin:
      case MetricKind::gc_geodesic: {
        const T cot = cos(theta) / sn;
        return 1.0 / (4.0 + cot * cot);
      }
    }
    return sn * sn;
  }

  /// rho(theta, phi); 1 for the non-conformal kinds.
  template <class T>
  T conformal_factor(const T& theta, const T& phi) const {
    using std::sin;
    switch (kind) {
      case MetricKind::geodesic_maupertuis: return h - potential_spherical(theta, phi, params);
      case MetricKind::gc_geodesic: return h - A1 * sin(theta) * sin(phi);
      default: return T(1.0);
    }
  }

  bool conformal() const { return kind == MetricKind::geodesic_maupertuis || kind == MetricKind::gc_geodesic; }
};

MetricProfile round_metric();
MetricProfile new_system_metric(const Params& p);
MetricProfile gc_metric();
MetricProfile maupertuis_metric(const Params& p, double h);
MetricProfile gc_geodesic_metric(double A1, double h1);

/// Gaussian curvature of the orthogonal metric E d theta^2 + G d phi^2 from the
/// Brioschi formula, with all derivatives from nested duals. DomainError off (0, pi).
double curvature(const MetricProfile& m, double theta, double phi = 0.0);
/// Same formula with derivatives from central differences at step h and h/2,
/// Richardson-combined. Independent of the dual path.
double curvature_stencil(const MetricProfile& m, double theta, double phi = 0.0, double h = 1e-4);
/// kappa on a theta grid at fixed phi; DomainError when the grid touches 0 or pi.
std::vector<double> curvature_profile(const MetricProfile& m, const std::vector<double>& thetas, double phi = 0.0);
/// n interior points (i + 1) pi / (n + 1).
std::vector<double> interior_theta_grid(std::size_t n);

// ---- positivity ------------------------------------------------------------

struct PositivityReport {
  double s = 0.0;
  std::size_t grid_points = 0;
  double min_R = 0.0;
  double min_R_z = 0.0;
  double min_C_form = 0.0;          ///< min of C (1 - z^2)(z + s)^2
  double max_identity_residual = 0.0; ///< max |C (1 - z^2)(z + s)^2 - R|, relative to max(1, R)
  double min_eigenvalue = 0.0;      ///< min eigenvalue of the kinetic form over the grid
  double R_at_minus_one = 0.0;
  double R_endpoint_error = 0.0;    ///< |R(-1) - (s - 1)^2|
  bool monotone = true;             ///< R nondecreasing along the grid
  bool positive() const { return min_R > 0.0 && min_C_form > 0.0 && min_eigenvalue > 0.0; }
};

/// Grid z_i = -1 + 2 (i + 1) / (n + 1), i < n. DomainError for s <= 1.
PositivityReport positivity_check(double s, std::size_t grid_points = 10000);
/// Unchecked probe for any s: the first grid z where R <= 0 or z + s <= 0, if any.
std::optional<double> positivity_violation(double s, std::size_t grid_points = 10000);

// ---- potential maximum -----------------------------------------------------

struct PotentialMaximum {
  double value = 0.0;
  double grid_value = 0.0;
  GlobalState position;  ///< momenta zero
};

/// Global maximum of V on the sphere: a 721 x 1440 (theta, phi) grid, then Newton
/// refinement of the best candidates in tangent-plane coordinates.
PotentialMaximum locate_max_potential(const Params& p);
double max_potential(const Params& p);

// ---- Maupertuis geodesic system ---------------------------------------------

/// Variants of the printed cubic integral of the geodesic flow:
/// F = 2 L p_phi - s_v 2 V p_phi + s_3 p_phi^3 + H_geod (s_v 2 V p_phi + A-terms),
/// with L = H (natural) or H_geod, s_3 = -1 when flip_cubic and s_v = -1 when flip_potential.
struct SignVariant {
  bool flip_cubic = false;
  bool geodesic_lead = false;
  bool flip_potential = false;

  std::string label() const;
  bool operator==(const SignVariant&) const = default;
};

/// All 8 variants, printed form first.
std::vector<SignVariant> all_sign_variants();

struct VariantResidual {
  SignVariant variant;
  double max_scaled_residual = 0.0;
  bool commutes = false;
};

struct SignResolution {
  std::vector<VariantResidual> table;
  std::size_t commuting = 0;
  std::optional<SignVariant> selected;  ///< set iff exactly one variant commutes
  std::size_t states = 0;
  double tolerance = 1e-9;
  /// "unique", or "reference" when several variants commute (degenerate couplings)
  /// and the variant resolved at generic reference couplings was taken.
  std::string rule = "unique";
};

/// Evaluate a scaled bracket for every variant at `states` random spherical states and
/// select the unique variant whose largest residual is below tolerance.
SignResolution resolve_sign_variants(const std::function<BracketValue(const SignVariant&, const SphericalState&)>& bracket,
                                     std::size_t states = 1000, std::uint64_t seed = 42, double tolerance = 1e-9);

template <class T>
T geodesic_hamiltonian_spherical(const std::array<T, 4>& u, const Params& p, double h) {
  return kinetic_spherical(u, p) / (h - potential_spherical(u[0], u[1], p));
}

template <class T>
T geodesic_integral_spherical(const std::array<T, 4>& u, const Params& p, double h, const SignVariant& v) {
  using std::cos;
  using std::sin;
  using std::sqrt;
  const T k = kinetic_spherical(u, p);
  const T pot = potential_spherical(u[0], u[1], p);
  const T hg = k / (h - pot);
  const T lead = v.geodesic_lead ? hg : T(k + pot);
  const double sv = v.flip_potential ? -1.0 : 1.0;
  const double s3 = v.flip_cubic ? -1.0 : 1.0;
  const T z = cos(u[0]);
  const T root_w = sqrt(structure::height_offset(z, p.s));
  const T& pp = u[3];
  const T a_terms = p.A * cos(u[1]) * structure::integral_numerator(z, p.s) / (root_w * sin(u[0])) * pp +
                    2.0 * p.A * sin(u[1]) * root_w * u[2];
  return 2.0 * lead * pp - sv * 2.0 * pot * pp + s3 * pp * pp * pp + hg * (sv * 2.0 * pot * pp + a_terms);
}

template <class T>
T geodesic_hamiltonian_global(const std::array<T, 6>& u, const Params& p, double h) {
  return kinetic_global(u, p) / (h - potential_global(u[0], u[2], p));
}

template <class T>
T geodesic_integral_global(const std::array<T, 6>& u, const Params& p, double h, const SignVariant& v) {
  using std::sqrt;
  const T k = kinetic_global(u, p);
  const T pot = potential_global(u[0], u[2], p);
  const T hg = k / (h - pot);
  const T lead = v.geodesic_lead ? hg : T(k + pot);
  const double sv = v.flip_potential ? -1.0 : 1.0;
  const double s3 = v.flip_cubic ? -1.0 : 1.0;
  const T w = structure::height_offset(u[2], p.s);
  const T& lz = u[5];
  const T a_terms = p.A / sqrt(w) * (u[0] * lz + 2.0 * w * u[3]);
  return 2.0 * lead * lz - sv * 2.0 * pot * lz + s3 * lz * lz * lz + hg * (sv * 2.0 * pot * lz + a_terms);
}

struct GeodesicHamiltonian {
  Params params;
  double h = 0.0;
  template <class T>
  T operator()(const std::array<T, 4>& u) const { return geodesic_hamiltonian_spherical(u, params, h); }
  template <class T>
  T operator()(const std::array<T, 6>& u) const { return geodesic_hamiltonian_global(u, params, h); }
};

struct GeodesicIntegral {
  Params params;
  double h = 0.0;
  SignVariant variant;
  template <class T>
  T operator()(const std::array<T, 4>& u) const { return geodesic_integral_spherical(u, params, h, variant); }
  template <class T>
  T operator()(const std::array<T, 6>& u) const { return geodesic_integral_global(u, params, h, variant); }
};

struct MaupertuisSystem {
  Params params;
  double h = 0.0;
  double max_potential = 0.0;
  SignResolution resolution;
  SignVariant variant;  ///< the resolved variant

  GeodesicHamiltonian hamiltonian() const { return {params, h}; }
  GeodesicIntegral integral() const { return {params, h, variant}; }
  MetricProfile metric() const { return maupertuis_metric(params, h); }
};

/// DomainError when h <= max V. When several variants commute (e.g. A = c = 0) the
/// variant resolved at the reference couplings A = 1, c = 1/2 with the same s is used,
/// provided it is among the commuting ones; otherwise std::runtime_error.
MaupertuisSystem maupertuis_system(const Params& p, double h, std::size_t states = 1000, std::uint64_t seed = 42);

struct GeodesicReport {
  std::size_t samples = 0;
  double tau_end = 0.0;                ///< reparametrized length, d tau = (h - V) dt
  double max_geodesic_residual = 0.0;  ///< |q'' + Gamma(q', q')| in the conformal metric
  double max_relative_F_drift = 0.0;   ///< resolved F_geod along the curve, relative to max(|F0|, 1)
  double max_energy_residual = 0.0;    ///< |H - h|
  double max_geodesic_speed_error = 0.0; ///< | |q'|^2 - 2 | in the conformal metric
};

/// Integrates the H-flow from `initial` (which must satisfy |H - h| <= 1e-10), reparametrizes
/// by d tau = (h - V) dt and checks the geodesic equations of rho (d theta^2 + f^2 d phi^2)
/// at every recorded sample, in the chart the sample lies in.
GeodesicReport geodesic_correspondence_check(const MaupertuisSystem& system, const SphericalState& initial,
                                             const IntegratorConfig& config);

/// Geodesic residual of a single phase-space point on H = h (q' and q'' from the H-field).
double geodesic_residual_at(const Params& p, double h, const CanonicalState& state);

/// Complete (theta, phi, p_theta) to a state on H = h with p_phi >= 0; DomainError if infeasible.
SphericalState state_on_energy(double theta, double phi, double p_theta, double h, const Params& p);

}  // namespace spheretop

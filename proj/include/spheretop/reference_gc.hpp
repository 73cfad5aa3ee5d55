#pragma once

// The reduced Goryachev-Chaplygin family (H1, F1), its Maupertuis geodesic
// family (H2, F2), and comparison diagnostics against the new system.

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "spheretop/charts.hpp"
#include "spheretop/geometry.hpp"
#include "spheretop/model.hpp"

namespace spheretop {

struct GCParams {
  double A1 = 1.0;  ///< coupling of V1 = A1 sin(theta) sin(phi)
  double h1 = 2.0;  ///< energy of the geodesic family, h1 > |A1|

  GCParams() = default;
  /// Throws DomainError on non-finite values.
  GCParams(double A1_, double h1_);
};

namespace gc {

template <class T>
T kinetic(const std::array<T, 4>& u) {
  using std::cos;
  using std::sin;
  const T cot = cos(u[0]) / sin(u[0]);
  return 0.5 * (cot * cot + 4.0) * u[3] * u[3] + 0.5 * u[2] * u[2];
}

template <class T>
T potential(const std::array<T, 4>& u, double A1) {
  using std::sin;
  return A1 * sin(u[0]) * sin(u[1]);
}

template <class T>
T hamiltonian(const std::array<T, 4>& u, double A1) {
  return kinetic(u) + potential(u, A1);
}

/// Momentum-linear A1 terms shared by F1 and F2.
template <class T>
T coupling_terms(const std::array<T, 4>& u, double A1) {
  using std::cos;
  using std::sin;
  const T ct = cos(u[0]);
  return -0.5 * A1 * u[2] * cos(u[1]) * ct + 0.5 * A1 * sin(u[1]) * (3.0 * ct * ct - 2.0) / sin(u[0]) * u[3];
}

template <class T>
T integral(const std::array<T, 4>& u, double A1) {
  return hamiltonian(u, A1) * u[3] - 2.0 * u[3] * u[3] * u[3] + coupling_terms(u, A1);
}

template <class T>
T geodesic_hamiltonian(const std::array<T, 4>& u, double A1, double h1) {
  return kinetic(u) / (h1 - potential(u, A1));
}

/// F2 = L p_phi - s_3 2 p_phi^3 - s_v V1 p_phi + H2 (s_v V1 p_phi + coupling terms),
/// L = H1 or H2 (see SignVariant).
template <class T>
T geodesic_integral(const std::array<T, 4>& u, double A1, double h1, const SignVariant& v) {
  const T pot = potential(u, A1);
  const T h2 = kinetic(u) / (h1 - pot);
  const T lead = v.geodesic_lead ? h2 : T(kinetic(u) + pot);
  const double sv = v.flip_potential ? -1.0 : 1.0;
  const double s3 = v.flip_cubic ? -1.0 : 1.0;
  const T& pp = u[3];
  return lead * pp - s3 * 2.0 * pp * pp * pp - sv * pot * pp + h2 * (sv * pot * pp + coupling_terms(u, A1));
}

}  // namespace gc

struct GCHamiltonian {
  double A1 = 1.0;
  template <class T>
  T operator()(const std::array<T, 4>& u) const { return gc::hamiltonian(u, A1); }
};

struct GCIntegral {
  double A1 = 1.0;
  template <class T>
  T operator()(const std::array<T, 4>& u) const { return gc::integral(u, A1); }
};

struct GCGeodesicHamiltonian {
  double A1 = 1.0;
  double h1 = 2.0;
  template <class T>
  T operator()(const std::array<T, 4>& u) const { return gc::geodesic_hamiltonian(u, A1, h1); }
};

struct GCGeodesicIntegral {
  double A1 = 1.0;
  double h1 = 2.0;
  SignVariant variant;
  template <class T>
  T operator()(const std::array<T, 4>& u) const { return gc::geodesic_integral(u, A1, h1, variant); }
};

/// Checked evaluations; DomainError at the poles.
double gc_hamiltonian(const SphericalState& s, const GCParams& g);
double gc_integral(const SphericalState& s, const GCParams& g);

struct GCGeodesicSystem {
  GCParams gc;
  SignResolution resolution;
  SignVariant variant;

  GCGeodesicHamiltonian hamiltonian() const { return {gc.A1, gc.h1}; }
  GCGeodesicIntegral integral() const { return {gc.A1, gc.h1, variant}; }
  MetricProfile metric() const { return gc_geodesic_metric(gc.A1, gc.h1); }
};

/// DomainError when h1 <= |A1|. Ambiguous resolutions (A1 = 0) fall back to the
/// variant resolved at A1 = 1 with the same ratio h1 / |A1| = 2, as for the new system.
GCGeodesicSystem gc_geodesic_system(const GCParams& g, std::size_t states = 1000, std::uint64_t seed = 42);

/// C_GC(theta) = 1 / sin^2(theta) + 3 = 4 + cot^2(theta).
double gc_azimuthal_coefficient(double theta);

struct CurvatureComparison {
  std::vector<double> thetas;
  std::vector<double> kappa_new;
  std::vector<double> kappa_gc;
  std::vector<double> c_new;   ///< C(cos theta)
  std::vector<double> c_gc;    ///< 1 / sin^2 theta + 3
  double kappa_new_spread = 0.0;  ///< max - min
  double kappa_gc_spread = 0.0;
  double c_new_spread = 0.0;
  double correction_spread = 0.0;    ///< spread of G(cos theta) = C - 1 / sin^2
  double difference_spread = 0.0;    ///< spread of C - C_GC = G - 3
  double best_alpha = 0.0;           ///< minimizer of max |C - alpha C_GC|
  double proportionality_margin = 0.0; ///< min over alpha > 0 of max |C - alpha C_GC|
  bool kappa_new_nonconstant() const { return kappa_new_spread > 0.0; }
  bool kappa_gc_nonconstant() const { return kappa_gc_spread > 0.0; }
};

/// Profiles on the theta grid (DomainError if it touches 0 or pi); the GC coupling is unused
/// because both kinetic profiles are independent of the potentials.
CurvatureComparison curvature_comparison(const Params& p, const std::vector<double>& thetas);

}  // namespace spheretop

#pragma once

// Phase-space states in three charts and the system's H, K, F in each.
//
//  * spherical  (theta, phi, p_theta, p_phi), canonical, valid off the poles
//  * pole chart (x, y, p_x, p_y) on one hemisphere, canonical, valid off the equator
//  * global     (x, y, z, L_x, L_y, L_z), Lie-Poisson variables, singularity free
//
// The embedding is (x, y, z) = (-sin(theta) cos(phi), -sin(theta) sin(phi), cos(theta))
// and L = r x p is the angular momentum, so L_z = p_phi. Global states are the
// canonical comparison chart: two states are "equal" when their global images are.

#include <array>
#include <cmath>
#include <complex>
#include <utility>
#include <variant>

#include "spheretop/model.hpp"

namespace spheretop {

enum class Hemisphere { north, south };

struct SphericalState {
  double theta = 0.5 * 3.14159265358979323846;
  double phi = 0.0;
  double p_theta = 0.0;
  double p_phi = 0.0;
};

struct PoleChartState {
  Hemisphere hemisphere = Hemisphere::north;
  double x = 0.0;
  double y = 0.0;
  double p_x = 0.0;
  double p_y = 0.0;

  double z() const {
    const double h = std::sqrt(1.0 - x * x - y * y);
    return hemisphere == Hemisphere::north ? h : -h;
  }
};

struct GlobalState {
  double x = 0.0;
  double y = 0.0;
  double z = 1.0;
  double Lx = 0.0;
  double Ly = 0.0;
  double Lz = 0.0;
};

/// xi = x + i y, eta = L_x + i L_y.
struct ComplexView {
  std::complex<double> xi;
  std::complex<double> eta;
};

/// A state in one of the two canonical charts used for time stepping.
using CanonicalState = std::variant<SphericalState, PoleChartState>;

inline std::array<double, 4> to_array(const SphericalState& s) { return {s.theta, s.phi, s.p_theta, s.p_phi}; }
inline std::array<double, 4> to_array(const PoleChartState& s) { return {s.x, s.y, s.p_x, s.p_y}; }
inline std::array<double, 6> to_array(const GlobalState& g) { return {g.x, g.y, g.z, g.Lx, g.Ly, g.Lz}; }
inline SphericalState spherical_from_array(const std::array<double, 4>& u) { return {u[0], u[1], u[2], u[3]}; }
inline PoleChartState pole_from_array(const std::array<double, 4>& u, Hemisphere h) { return {h, u[0], u[1], u[2], u[3]}; }
inline GlobalState global_from_array(const std::array<double, 6>& u) { return {u[0], u[1], u[2], u[3], u[4], u[5]}; }

/// Reduce an angle to [0, 2 pi).
double wrap_angle(double phi);

void validate(const SphericalState& s);  ///< throws DomainError off (0, pi)
void validate(const PoleChartState& s);  ///< throws DomainError unless x^2 + y^2 < 1

/// (|r|^2 - 1, r . L).
std::pair<double, double> casimir_residuals(const GlobalState& g);
/// Throws DomainError when the Casimirs are violated beyond 1e-12 (scaled by 1 + |L| for r . L).
void validate(const GlobalState& g);

// ---- chart transformations ------------------------------------------------

PoleChartState spherical_to_pole(const SphericalState& s, Hemisphere hemisphere);
SphericalState pole_to_spherical(const PoleChartState& s);
GlobalState spherical_to_global(const SphericalState& s);
/// Inverse of spherical_to_global; undefined (DomainError) at |z| = 1.
SphericalState global_to_spherical(const GlobalState& g);
GlobalState pole_to_global(const PoleChartState& s);
/// Pole chart on the hemisphere containing g; undefined (DomainError) at z = 0.
PoleChartState global_to_pole(const GlobalState& g);
GlobalState to_global(const CanonicalState& s);
ComplexView complex_view(const GlobalState& g);

/// Project onto the Casimir level set: |r| = 1 and L orthogonal to r.
GlobalState project_to_casimir_level(const GlobalState& g);

// ---- H, K, F in each chart (generic in the scalar type for differentiation) ----

template <class T>
T kinetic_spherical(const std::array<T, 4>& u, const Params& p) {
  using std::cos;
  using std::sin;
  const T sn = sin(u[0]);
  const T coeff = 1.0 / (sn * sn) + structure::inertia_correction(T(cos(u[0])), p.s);
  return 0.5 * (u[2] * u[2] + coeff * u[3] * u[3]);
}

template <class T>
T hamiltonian_spherical(const std::array<T, 4>& u, const Params& p) {
  return kinetic_spherical(u, p) + potential_spherical(u[0], u[1], p);
}

template <class T>
T integral_spherical(const std::array<T, 4>& u, const Params& p) {
  using std::cos;
  using std::sin;
  using std::sqrt;
  const T h = hamiltonian_spherical(u, p);
  const T z = cos(u[0]);
  const T root_w = sqrt(structure::height_offset(z, p.s));
  const T& p_phi = u[3];
  return 2.0 * h * p_phi - p_phi * p_phi * p_phi +
         p.A * cos(u[1]) * structure::integral_numerator(z, p.s) / (root_w * sin(u[0])) * p_phi +
         2.0 * p.A * sin(u[1]) * root_w * u[2];
}

template <class T>
T pole_height(const T& x, const T& y, Hemisphere h) {
  using std::sqrt;
  const T r = sqrt(1.0 - x * x - y * y);
  return h == Hemisphere::north ? r : T(-r);
}

template <class T>
T kinetic_pole(const std::array<T, 4>& u, Hemisphere hemi, const Params& p) {
  const T z = pole_height(u[0], u[1], hemi);
  const T radial = u[0] * u[2] + u[1] * u[3];
  const T spin = u[0] * u[3] - u[1] * u[2];
  return 0.5 * (u[2] * u[2] + u[3] * u[3] - radial * radial +
                spin * spin * structure::inertia_correction(z, p.s));
}

template <class T>
T hamiltonian_pole(const std::array<T, 4>& u, Hemisphere hemi, const Params& p) {
  return kinetic_pole(u, hemi, p) + potential_global(u[0], pole_height(u[0], u[1], hemi), p);
}

/// Global short form of F expressed through (z, x, L_x, L_z) and H.
template <class T>
T integral_from_angular(const T& h, const T& x, const T& z, const T& Lx, const T& Lz, const Params& p) {
  using std::sqrt;
  const T w = structure::height_offset(z, p.s);
  return 2.0 * h * Lz - Lz * Lz * Lz + p.A / sqrt(w) * (x * Lz + 2.0 * w * Lx);
}

template <class T>
T integral_pole(const std::array<T, 4>& u, Hemisphere hemi, const Params& p) {
  const T z = pole_height(u[0], u[1], hemi);
  const T Lx = -z * u[3];
  const T Lz = u[0] * u[3] - u[1] * u[2];
  return integral_from_angular(hamiltonian_pole(u, hemi, p), u[0], z, Lx, Lz, p);
}

template <class T>
T kinetic_global(const std::array<T, 6>& u, const Params& p) {
  return 0.5 * (u[3] * u[3] + u[4] * u[4] + (1.0 + structure::inertia_correction(u[2], p.s)) * u[5] * u[5]);
}

template <class T>
T hamiltonian_global(const std::array<T, 6>& u, const Params& p) {
  return kinetic_global(u, p) + potential_global(u[0], u[2], p);
}

template <class T>
T integral_global(const std::array<T, 6>& u, const Params& p) {
  return integral_from_angular(hamiltonian_global(u, p), u[0], u[2], u[3], u[5], p);
}

// Observables as callables, for the bracket engine.

struct SphericalHamiltonian {
  Params params;
  template <class T>
  T operator()(const std::array<T, 4>& u) const { return hamiltonian_spherical(u, params); }
};

struct SphericalIntegral {
  Params params;
  template <class T>
  T operator()(const std::array<T, 4>& u) const { return integral_spherical(u, params); }
};

struct PoleHamiltonian {
  Params params;
  Hemisphere hemisphere = Hemisphere::north;
  template <class T>
  T operator()(const std::array<T, 4>& u) const { return hamiltonian_pole(u, hemisphere, params); }
};

struct PoleIntegral {
  Params params;
  Hemisphere hemisphere = Hemisphere::north;
  template <class T>
  T operator()(const std::array<T, 4>& u) const { return integral_pole(u, hemisphere, params); }
};

struct GlobalHamiltonian {
  Params params;
  template <class T>
  T operator()(const std::array<T, 6>& u) const { return hamiltonian_global(u, params); }
};

struct GlobalIntegral {
  Params params;
  template <class T>
  T operator()(const std::array<T, 6>& u) const { return integral_global(u, params); }
};

// Checked double evaluations.

double kinetic_energy(const SphericalState& s, const Params& p);
double kinetic_energy(const PoleChartState& s, const Params& p);
double kinetic_energy(const GlobalState& g, const Params& p);
double hamiltonian(const SphericalState& s, const Params& p);
double hamiltonian(const PoleChartState& s, const Params& p);
double hamiltonian(const GlobalState& g, const Params& p);
double hamiltonian(const CanonicalState& s, const Params& p);
double integral_F(const SphericalState& s, const Params& p);
double integral_F(const PoleChartState& s, const Params& p);
double integral_F(const GlobalState& g, const Params& p);
double integral_F(const CanonicalState& s, const Params& p);

/// Symmetric 2x2 matrix [[a, b], [b, d]].
struct SymMatrix2 {
  double a = 0.0;
  double b = 0.0;
  double d = 0.0;

  std::pair<double, double> eigenvalues() const;  ///< ascending
  double min_eigenvalue() const { return eigenvalues().first; }
};

/// Matrix M of the kinetic energy K = p^T M p / 2 at a spherical position.
SymMatrix2 kinetic_quadratic_form(double theta, const Params& p);
/// Same in the pole chart at (x, y) on the given hemisphere.
SymMatrix2 kinetic_quadratic_form(double x, double y, Hemisphere hemisphere, const Params& p);

}  // namespace spheretop

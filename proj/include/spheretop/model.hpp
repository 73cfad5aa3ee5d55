#pragma once

// Parameters and scalar structure functions of the cubic-integral system.
//
// Everything is written in terms of the height z = cos(theta) on the unit
// sphere. The shape parameter s > 1 keeps z + s bounded away from zero on
// [-1, 1], so every square root below is real and single valued.

#include <cmath>
#include <optional>
#include <utility>

#include "spheretop/errors.hpp"

namespace spheretop {

/// Couplings (A, c) and shape parameter s of the system.
struct Params {
  double A = 0.0;  ///< trigonometric potential coupling
  double c = 0.0;  ///< 1/W potential coupling
  double s = 2.0;  ///< shape parameter, s > 1

  Params() = default;
  /// Throws DomainError unless s > 1 and all fields are finite.
  Params(double A_, double c_, double s_);
};

/// Values of the structure functions at a single height z.
struct StructureValues {
  double z = 0.0;
  double height_offset = 0.0;          ///< W = z + s
  double correction_numerator = 0.0;   ///< P = 3z^2 + 4sz + 1
  double integral_numerator = 0.0;     ///< Q = 3z^2 + 2sz - 1
  double inertia_correction = 0.0;     ///< G = P / (2W)^2
  double positivity_numerator = 0.0;   ///< R = C (1 - z^2) W^2
  std::optional<double> azimuthal_coefficient;  ///< C = 1/(1-z^2) + G; empty at z = +-1
};

namespace structure {

template <class T>
T height_offset(const T& z, double s) {
  return z + s;
}

template <class T>
T correction_numerator(const T& z, double s) {
  return 3.0 * z * z + 4.0 * s * z + 1.0;
}

template <class T>
T integral_numerator(const T& z, double s) {
  return 3.0 * z * z + 2.0 * s * z - 1.0;
}

template <class T>
T inertia_correction(const T& z, double s) {
  const T w = height_offset(z, s);
  return correction_numerator(z, s) / (4.0 * w * w);
}

/// C(z) = 1/(1 - z^2) + G(z): twice the p_phi^2 coefficient of the kinetic energy.
template <class T>
T azimuthal_coefficient(const T& z, double s) {
  return 1.0 / (1.0 - z * z) + inertia_correction(z, s);
}

/// R(z) = C(z) (1 - z^2) (z + s)^2, a quartic that is positive on (-1, 1) for s > 1.
template <class T>
T positivity_numerator(const T& z, double s) {
  const T z2 = z * z;
  return 1.5 * z2 + 3.0 * s * z + s * s - 0.75 * z2 * z2 - s * z2 * z + 0.25;
}

/// dR/dz = 3 (1 - z^2)(z + s).
template <class T>
T positivity_numerator_slope(const T& z, double s) {
  return 3.0 * (1.0 - z * z) * (z + s);
}

}  // namespace structure

/// All structure values at z. Throws DomainError for z outside [-1, 1] or s <= 1.
StructureValues eval_structure(double z, double s);

/// Residuals of Q - (2zW + z^2 - 1) and P - (4zW + 1 - z^2).
std::pair<double, double> check_identities(double z, double s);

/// dR/dz evaluated from the closed form 3 (1 - z^2)(z + s).
double structure_derivative(double z, double s);

// Potential energy in the three charts. The embedding convention is
// (x, y, z) = (-sin(theta) cos(phi), -sin(theta) sin(phi), cos(theta)).

template <class T>
T potential_global(const T& x, const T& z, const Params& p) {
  using std::sqrt;
  const T w = structure::height_offset(z, p.s);
  return -p.A * x / sqrt(w) + p.c / w;
}

template <class T>
T potential_spherical(const T& theta, const T& phi, const Params& p) {
  using std::cos;
  using std::sin;
  using std::sqrt;
  const T w = structure::height_offset(T(cos(theta)), p.s);
  return p.A * sin(theta) / sqrt(w) * cos(phi) + p.c / w;
}

/// Potential in spherical coordinates; rejects theta at (or outside) the poles.
double potential(double theta, double phi, const Params& p);
/// Potential at an embedded point (x, y, z) of the unit sphere.
double potential(double x, double y, double z, const Params& p);

/// U(z) with V = x U(z); only defined for c = 0.
double linear_potential_profile(double z, const Params& p);

}  // namespace spheretop

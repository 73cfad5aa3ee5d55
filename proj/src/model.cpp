#include "spheretop/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace spheretop {

Params::Params(double A_, double c_, double s_) : A(A_), c(c_), s(s_) {
  if (!std::isfinite(A) || !std::isfinite(c) || !std::isfinite(s)) {
    throw DomainError("Params: all fields must be finite");
  }
  if (!(s > 1.0)) {
    throw DomainError("Params: shape parameter must satisfy s > 1 (got s = " + std::to_string(s) + ")");
  }
}

namespace {

void require_shape(double s) {
  if (!(s > 1.0) || !std::isfinite(s)) {
    throw DomainError("shape parameter must satisfy s > 1");
  }
}

}  // namespace

StructureValues eval_structure(double z, double s) {
  require_shape(s);
  if (!(z >= -1.0 && z <= 1.0)) {
    throw DomainError("eval_structure: z must lie in [-1, 1]");
  }
  StructureValues v;
  v.z = z;
  v.height_offset = structure::height_offset(z, s);
  v.correction_numerator = structure::correction_numerator(z, s);
  v.integral_numerator = structure::integral_numerator(z, s);
  v.inertia_correction = structure::inertia_correction(z, s);
  v.positivity_numerator = structure::positivity_numerator(z, s);
  if (std::abs(z) < 1.0) {
    v.azimuthal_coefficient = structure::azimuthal_coefficient(z, s);
  }
  return v;
}

std::pair<double, double> check_identities(double z, double s) {
  require_shape(s);
  const double w = structure::height_offset(z, s);
  const double q = structure::integral_numerator(z, s);
  const double p = structure::correction_numerator(z, s);
  return {q - (2.0 * z * w + z * z - 1.0), p - (4.0 * z * w + 1.0 - z * z)};
}

double structure_derivative(double z, double s) {
  require_shape(s);
  return structure::positivity_numerator_slope(z, s);
}

double potential(double theta, double phi, const Params& p) {
  if (!(theta > 0.0 && theta < std::numbers::pi)) {
    throw DomainError("potential: spherical chart requires 0 < theta < pi");
  }
  return potential_spherical(theta, phi, p);
}

double potential(double x, double /*y*/, double z, const Params& p) {
  if (!(z >= -1.0 && z <= 1.0)) {
    throw DomainError("potential: z must lie in [-1, 1]");
  }
  return potential_global(x, z, p);
}

double linear_potential_profile(double z, const Params& p) {
  if (p.c != 0.0) {
    throw DomainError("linear_potential_profile: V = x U(z) only holds for c = 0");
  }
  return -p.A / std::sqrt(structure::height_offset(z, p.s));
}

}  // namespace spheretop

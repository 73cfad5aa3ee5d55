#include "spheretop/charts.hpp"

#include <cmath>
#include <numbers>

namespace spheretop {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double pole_z(double x, double y, Hemisphere h) { return pole_height(x, y, h); }

}  // namespace

double wrap_angle(double phi) {
  double r = std::fmod(phi, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  if (r >= kTwoPi) r = 0.0;
  return r;
}

void validate(const SphericalState& s) {
  if (!std::isfinite(s.theta) || !std::isfinite(s.phi) || !std::isfinite(s.p_theta) || !std::isfinite(s.p_phi)) {
    throw DomainError("spherical state has non-finite components");
  }
  if (!(s.theta > 0.0 && s.theta < std::numbers::pi)) {
    throw DomainError("spherical chart requires 0 < theta < pi");
  }
}

void validate(const PoleChartState& s) {
  if (!std::isfinite(s.x) || !std::isfinite(s.y) || !std::isfinite(s.p_x) || !std::isfinite(s.p_y)) {
    throw DomainError("pole-chart state has non-finite components");
  }
  if (!(s.x * s.x + s.y * s.y < 1.0)) {
    throw DomainError("pole chart requires x^2 + y^2 < 1");
  }
}

std::pair<double, double> casimir_residuals(const GlobalState& g) {
  return {g.x * g.x + g.y * g.y + g.z * g.z - 1.0, g.x * g.Lx + g.y * g.Ly + g.z * g.Lz};
}

void validate(const GlobalState& g) {
  const auto [radius, spin] = casimir_residuals(g);
  const double l = std::sqrt(g.Lx * g.Lx + g.Ly * g.Ly + g.Lz * g.Lz);
  if (!(std::abs(radius) <= 1e-12) || !(std::abs(spin) <= 1e-12 * (1.0 + l))) {
    throw DomainError("global state violates the Casimir constraints");
  }
}

PoleChartState spherical_to_pole(const SphericalState& s, Hemisphere hemisphere) {
  validate(s);
  const double z = std::cos(s.theta);
  if ((hemisphere == Hemisphere::north && !(z > 0.0)) || (hemisphere == Hemisphere::south && !(z < 0.0))) {
    throw DomainError("spherical_to_pole: requested hemisphere does not contain theta");
  }
  const double rho = std::sin(s.theta);
  const double x = -rho * std::cos(s.phi);
  const double y = -rho * std::sin(s.phi);
  const double rho2 = x * x + y * y;
  const double radial = s.p_theta * rho / z;  // x p_x + y p_y
  const double spin = s.p_phi;                // x p_y - y p_x
  return {hemisphere, x, y, (x * radial - y * spin) / rho2, (y * radial + x * spin) / rho2};
}

SphericalState pole_to_spherical(const PoleChartState& s) {
  validate(s);
  const double rho = std::hypot(s.x, s.y);
  if (!(rho > 0.0)) throw DomainError("pole_to_spherical: the pole itself has no spherical coordinates");
  const double z = s.z();
  return {std::atan2(rho, z), wrap_angle(std::atan2(-s.y, -s.x)), z / rho * (s.x * s.p_x + s.y * s.p_y),
          s.x * s.p_y - s.y * s.p_x};
}

GlobalState spherical_to_global(const SphericalState& s) {
  validate(s);
  const double st = std::sin(s.theta);
  const double ct = std::cos(s.theta);
  const double sp = std::sin(s.phi);
  const double cp = std::cos(s.phi);
  const double cot = ct / st;
  return {-st * cp, -st * sp, ct, sp * s.p_theta + cot * cp * s.p_phi, -cp * s.p_theta + cot * sp * s.p_phi, s.p_phi};
}

SphericalState global_to_spherical(const GlobalState& g) {
  const double rho = std::hypot(g.x, g.y);
  if (!(rho > 0.0)) throw DomainError("global_to_spherical: undefined at the poles");
  const double phi = std::atan2(-g.y, -g.x);
  return {std::atan2(rho, g.z), wrap_angle(phi), std::sin(phi) * g.Lx - std::cos(phi) * g.Ly, g.Lz};
}

GlobalState pole_to_global(const PoleChartState& s) {
  validate(s);
  const double z = s.z();
  return {s.x, s.y, z, -z * s.p_y, z * s.p_x, s.x * s.p_y - s.y * s.p_x};
}

PoleChartState global_to_pole(const GlobalState& g) {
  if (g.z == 0.0) throw DomainError("global_to_pole: the equator is outside both pole charts");
  const Hemisphere h = g.z > 0.0 ? Hemisphere::north : Hemisphere::south;
  return {h, g.x, g.y, g.Ly / g.z, -g.Lx / g.z};
}

GlobalState to_global(const CanonicalState& s) {
  return std::visit(
      [](const auto& st) -> GlobalState {
        using S = std::decay_t<decltype(st)>;
        if constexpr (std::is_same_v<S, SphericalState>) {
          return spherical_to_global(st);
        } else {
          return pole_to_global(st);
        }
      },
      s);
}

ComplexView complex_view(const GlobalState& g) { return {{g.x, g.y}, {g.Lx, g.Ly}}; }

GlobalState project_to_casimir_level(const GlobalState& g) {
  const double r = std::sqrt(g.x * g.x + g.y * g.y + g.z * g.z);
  GlobalState out{g.x / r, g.y / r, g.z / r, g.Lx, g.Ly, g.Lz};
  const double dot = out.x * g.Lx + out.y * g.Ly + out.z * g.Lz;
  out.Lx -= dot * out.x;
  out.Ly -= dot * out.y;
  out.Lz -= dot * out.z;
  return out;
}

double kinetic_energy(const SphericalState& s, const Params& p) {
  validate(s);
  return kinetic_spherical(to_array(s), p);
}

double kinetic_energy(const PoleChartState& s, const Params& p) {
  validate(s);
  return kinetic_pole(to_array(s), s.hemisphere, p);
}

double kinetic_energy(const GlobalState& g, const Params& p) { return kinetic_global(to_array(g), p); }

double hamiltonian(const SphericalState& s, const Params& p) {
  validate(s);
  return hamiltonian_spherical(to_array(s), p);
}

double hamiltonian(const PoleChartState& s, const Params& p) {
  validate(s);
  return hamiltonian_pole(to_array(s), s.hemisphere, p);
}

double hamiltonian(const GlobalState& g, const Params& p) { return hamiltonian_global(to_array(g), p); }

double hamiltonian(const CanonicalState& s, const Params& p) {
  return std::visit([&p](const auto& st) { return hamiltonian(st, p); }, s);
}

double integral_F(const SphericalState& s, const Params& p) {
  validate(s);
  return integral_spherical(to_array(s), p);
}

double integral_F(const PoleChartState& s, const Params& p) {
  validate(s);
  return integral_pole(to_array(s), s.hemisphere, p);
}

double integral_F(const GlobalState& g, const Params& p) { return integral_global(to_array(g), p); }

double integral_F(const CanonicalState& s, const Params& p) {
  return std::visit([&p](const auto& st) { return integral_F(st, p); }, s);
}

std::pair<double, double> SymMatrix2::eigenvalues() const {
  const double mean = 0.5 * (a + d);
  const double radius = std::hypot(0.5 * (a - d), b);
  return {mean - radius, mean + radius};
}

SymMatrix2 kinetic_quadratic_form(double theta, const Params& p) {
  if (!(theta > 0.0 && theta < std::numbers::pi)) {
    throw DomainError("kinetic_quadratic_form: spherical chart requires 0 < theta < pi");
  }
  const double st = std::sin(theta);
  return {1.0, 0.0, 1.0 / (st * st) + structure::inertia_correction(std::cos(theta), p.s)};
}

SymMatrix2 kinetic_quadratic_form(double x, double y, Hemisphere hemisphere, const Params& p) {
  if (!(x * x + y * y < 1.0)) throw DomainError("kinetic_quadratic_form: pole chart requires x^2 + y^2 < 1");
  const double g = structure::inertia_correction(pole_z(x, y, hemisphere), p.s);
  return {1.0 - x * x + g * y * y, -x * y * (1.0 + g), 1.0 - y * y + g * x * x};
}

}  // namespace spheretop

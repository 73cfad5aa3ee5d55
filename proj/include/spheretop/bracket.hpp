#pragma once

// Poisson brackets and Hamiltonian vector fields.
//
// Observables are callables templated on the scalar type, taking a
// std::array<T, 4> (canonical charts: q1, q2, p1, p2) or std::array<T, 6>
// (global chart: x, y, z, L_x, L_y, L_z). Derivatives come from forward-mode
// duals, so brackets are exact up to roundoff. Nesting duals (passing a
// bracket itself as an observable) gives second derivatives.
//
// Orientation: df/dt = {f, H}, so d(theta)/dt = +dH/dp_theta.

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <map>

#include "spheretop/charts.hpp"
#include "spheretop/dual.hpp"

namespace spheretop {

template <std::size_t N, class T, class F>
std::array<T, N> gradient(const F& f, const std::array<T, N>& u) {
  std::array<Dual<N, T>, N> v;
  for (std::size_t i = 0; i < N; ++i) v[i] = Dual<N, T>::variable(u[i], i);
  return f(v).partials;
}

template <std::size_t N>
double norm(const std::array<double, N>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

/// A bracket value together with its natural scale 1 + |grad f| |grad g|.
struct BracketValue {
  double value = 0.0;
  double scale = 1.0;
  double scaled() const { return std::abs(value) / scale; }
};

template <class F, class G, class T>
T canonical_bracket(const F& f, const G& g, const std::array<T, 4>& u) {
  const auto df = gradient(f, u);
  const auto dg = gradient(g, u);
  return df[0] * dg[2] + df[1] * dg[3] - df[2] * dg[0] - df[3] * dg[1];
}

template <class F, class G>
BracketValue canonical_bracket_scaled(const F& f, const G& g, const std::array<double, 4>& u) {
  const auto df = gradient(f, u);
  const auto dg = gradient(g, u);
  return {df[0] * dg[2] + df[1] * dg[3] - df[2] * dg[0] - df[3] * dg[1], 1.0 + norm(df) * norm(dg)};
}

/// Structure matrix of the (x, L) bracket: {r_i, L_j} = eps_ijk r_k, {L_i, L_j} = eps_ijk L_k.
template <class T>
std::array<std::array<T, 6>, 6> lie_poisson_structure(const std::array<T, 6>& u) {
  std::array<std::array<T, 6>, 6> m{};
  const T& x = u[0];
  const T& y = u[1];
  const T& z = u[2];
  const T& lx = u[3];
  const T& ly = u[4];
  const T& lz = u[5];
  // {r_i, L_j}
  m[0][4] = z;
  m[0][5] = -y;
  m[1][3] = -z;
  m[1][5] = x;
  m[2][3] = y;
  m[2][4] = -x;
  // {L_i, L_j}
  m[3][4] = lz;
  m[3][5] = -ly;
  m[4][5] = lx;
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < i; ++j) m[i][j] = -m[j][i];
  }
  return m;
}

template <class F, class G, class T>
T lie_poisson_bracket(const F& f, const G& g, const std::array<T, 6>& u) {
  const auto df = gradient(f, u);
  const auto dg = gradient(g, u);
  const auto m = lie_poisson_structure(u);
  T acc(0.0);
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 6; ++j) acc += df[i] * m[i][j] * dg[j];
  }
  return acc;
}

template <class F, class G>
BracketValue lie_poisson_bracket_scaled(const F& f, const G& g, const GlobalState& state) {
  const auto u = to_array(state);
  const auto df = gradient(f, u);
  const auto dg = gradient(g, u);
  return {lie_poisson_bracket(f, g, u), 1.0 + norm(df) * norm(dg)};
}

/// (dH/dp, -dH/dq) in a canonical chart.
template <class H, class T>
std::array<T, 4> canonical_vector_field(const H& h, const std::array<T, 4>& u) {
  const auto d = gradient(h, u);
  return {d[2], d[3], -d[0], -d[1]};
}

/// Pi(u) grad H in the global chart.
template <class H, class T>
std::array<T, 6> lie_poisson_vector_field(const H& h, const std::array<T, 6>& u) {
  const auto d = gradient(h, u);
  const auto m = lie_poisson_structure(u);
  std::array<T, 6> out{};
  for (int i = 0; i < 6; ++i) {
    T acc(0.0);
    for (int j = 0; j < 6; ++j) acc += m[i][j] * d[j];
    out[i] = acc;
  }
  return out;
}

/// Time derivative of the state under the system's H, in the state's own chart.
std::array<double, 4> hamiltonian_vector_field(const SphericalState& s, const Params& p);
std::array<double, 4> hamiltonian_vector_field(const PoleChartState& s, const Params& p);
std::array<double, 6> hamiltonian_vector_field(const GlobalState& g, const Params& p);

/// Comparison of the bracket-derived field with the complex equations of
/// motion written in (xi, eta), together with the z and L_z component
/// equations. "printed" residuals compare against the equations as written;
/// "reversed" residuals compare against their time reversal (field + printed).
struct EomCheck {
  std::complex<double> xi_dot;
  std::complex<double> eta_dot;
  std::complex<double> xi_dot_printed;
  std::complex<double> eta_dot_printed;
  double xi_residual = 0.0;
  double eta_residual = 0.0;
  double xi_residual_reversed = 0.0;
  double eta_residual_reversed = 0.0;
  double z_dot_residual = 0.0;   ///< |z' - (x L_y - y L_x)|
  double lz_dot_residual = 0.0;  ///< |L_z' - (-y U)|
  double z_dot_residual_reversed = 0.0;
  double lz_dot_residual_reversed = 0.0;
};

/// Requires c = 0 (DomainError otherwise).
EomCheck eom_complex_residual(const GlobalState& g, const Params& p);

// ---- momentum polynomials and degree-wise brackets -------------------------

/// Coefficient functions carry their (theta, phi) gradient.
using CoefficientJet = Dual<2>;
using CoefficientFn = std::function<CoefficientJet(const CoefficientJet& theta, const CoefficientJet& phi)>;

/// p_theta^theta_degree p_phi^phi_degree.
struct Monomial {
  int theta_degree = 0;
  int phi_degree = 0;
  int degree() const { return theta_degree + phi_degree; }
  auto operator<=>(const Monomial&) const = default;
};

/// Polynomial in (p_theta, p_phi) with position-dependent coefficients.
class MomentumPolynomial {
 public:
  /// Adds fn to the coefficient of m.
  MomentumPolynomial& add(Monomial m, CoefficientFn fn);
  int degree() const;
  const std::map<Monomial, CoefficientFn>& terms() const { return terms_; }
  double evaluate(const SphericalState& s) const;

 private:
  std::map<Monomial, CoefficientFn> terms_;
};

using BracketCoefficients = std::map<Monomial, BracketValue>;

/// Coefficients of the canonical bracket {h, f} at (theta, phi), one per
/// momentum monomial of total degree <= deg h + deg f - 1 (structural zeros
/// included). Scale of each entry is 1 + sum of |contributions|.
/// Throws DomainError when deg h > 2 or deg f > 3.
BracketCoefficients bracket_degree_decomposition(const MomentumPolynomial& h, const MomentumPolynomial& f, double theta,
                                                 double phi);

/// Evaluate decomposed bracket coefficients at given momenta.
double evaluate(const BracketCoefficients& coeffs, double p_theta, double p_phi);

struct SystemPolynomials {
  MomentumPolynomial hamiltonian;
  MomentumPolynomial integral;
};

/// H and F of the system written as momentum polynomials in the spherical chart.
SystemPolynomials system_momentum_polynomials(const Params& p);

}  // namespace spheretop

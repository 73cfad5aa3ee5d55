#include "spheretop/bracket.hpp"

#include <algorithm>
#include <cmath>

namespace spheretop {

std::array<double, 4> hamiltonian_vector_field(const SphericalState& s, const Params& p) {
  validate(s);
  return canonical_vector_field(SphericalHamiltonian{p}, to_array(s));
}

std::array<double, 4> hamiltonian_vector_field(const PoleChartState& s, const Params& p) {
  validate(s);
  return canonical_vector_field(PoleHamiltonian{p, s.hemisphere}, to_array(s));
}

std::array<double, 6> hamiltonian_vector_field(const GlobalState& g, const Params& p) {
  return lie_poisson_vector_field(GlobalHamiltonian{p}, to_array(g));
}

EomCheck eom_complex_residual(const GlobalState& g, const Params& p) {
  if (p.c != 0.0) throw DomainError("eom_complex_residual: the (xi, eta) equations assume c = 0");
  using std::complex;
  const auto field = hamiltonian_vector_field(g, p);

  const double z = g.z;
  const double w = structure::height_offset(z, p.s);
  const auto gz = structure::inertia_correction(Dual<1>::variable(z, 0), p.s);
  const double u = -p.A / std::sqrt(w);
  const double du = 0.5 * p.A / (w * std::sqrt(w));

  const ComplexView cv = complex_view(g);
  const complex<double> i(0.0, 1.0);
  const complex<double>& xi = cv.xi;
  const complex<double>& eta = cv.eta;

  EomCheck out;
  out.xi_dot = {field[0], field[1]};
  out.eta_dot = {field[3], field[4]};
  out.xi_dot_printed = i * (-g.Lz * (1.0 + gz.value) * xi + z * eta);
  out.eta_dot_printed = i * (-0.5 * gz.partials[0] * g.Lz * g.Lz * xi - g.Lz * gz.value * eta + z * u -
                             0.5 * du * (xi * xi + xi * std::conj(xi)));
  out.xi_residual = std::abs(out.xi_dot - out.xi_dot_printed);
  out.eta_residual = std::abs(out.eta_dot - out.eta_dot_printed);
  out.xi_residual_reversed = std::abs(out.xi_dot + out.xi_dot_printed);
  out.eta_residual_reversed = std::abs(out.eta_dot + out.eta_dot_printed);

  const double z_dot_printed = g.x * g.Ly - g.y * g.Lx;
  const double lz_dot_printed = -g.y * u;
  out.z_dot_residual = std::abs(field[2] - z_dot_printed);
  out.lz_dot_residual = std::abs(field[5] - lz_dot_printed);
  out.z_dot_residual_reversed = std::abs(field[2] + z_dot_printed);
  out.lz_dot_residual_reversed = std::abs(field[5] + lz_dot_printed);
  return out;
}

MomentumPolynomial& MomentumPolynomial::add(Monomial m, CoefficientFn fn) {
  auto it = terms_.find(m);
  if (it == terms_.end()) {
    terms_.emplace(m, std::move(fn));
  } else {
    it->second = [old = std::move(it->second), fn = std::move(fn)](const CoefficientJet& t, const CoefficientJet& f) {
      return old(t, f) + fn(t, f);
    };
  }
  return *this;
}

int MomentumPolynomial::degree() const {
  int d = 0;
  for (const auto& [m, fn] : terms_) d = std::max(d, m.degree());
  return d;
}

double MomentumPolynomial::evaluate(const SphericalState& s) const {
  double acc = 0.0;
  for (const auto& [m, fn] : terms_) {
    acc += fn(CoefficientJet(s.theta), CoefficientJet(s.phi)).value * std::pow(s.p_theta, m.theta_degree) *
           std::pow(s.p_phi, m.phi_degree);
  }
  return acc;
}

BracketCoefficients bracket_degree_decomposition(const MomentumPolynomial& h, const MomentumPolynomial& f, double theta,
                                                 double phi) {
  if (h.degree() > 2) throw DomainError("bracket_degree_decomposition: first argument exceeds momentum degree 2");
  if (f.degree() > 3) throw DomainError("bracket_degree_decomposition: second argument exceeds momentum degree 3");

  const CoefficientJet t = CoefficientJet::variable(theta, 0);
  const CoefficientJet ph = CoefficientJet::variable(phi, 1);

  BracketCoefficients out;
  const int top = std::max(0, h.degree() + f.degree() - 1);
  for (int d = 0; d <= top; ++d) {
    for (int i = 0; i <= d; ++i) out[{i, d - i}] = BracketValue{0.0, 1.0};
  }

  auto accumulate = [&out](Monomial m, double value) {
    auto& entry = out[m];
    entry.value += value;
    entry.scale += std::abs(value);
  };

  for (const auto& [mh, fh] : h.terms()) {
    const CoefficientJet a = fh(t, ph);
    for (const auto& [mf, ff] : f.terms()) {
      const CoefficientJet b = ff(t, ph);
      const int i = mh.theta_degree;
      const int j = mh.phi_degree;
      const int k = mf.theta_degree;
      const int l = mf.phi_degree;
      // d/dtheta of h times d/dp_theta of f, minus the reverse.
      if (i + k > 0) {
        const Monomial m{i + k - 1, j + l};
        if (k > 0) accumulate(m, a.partials[0] * b.value * k);
        if (i > 0) accumulate(m, -a.value * b.partials[0] * i);
      }
      if (j + l > 0) {
        const Monomial m{i + k, j + l - 1};
        if (l > 0) accumulate(m, a.partials[1] * b.value * l);
        if (j > 0) accumulate(m, -a.value * b.partials[1] * j);
      }
    }
  }
  return out;
}

double evaluate(const BracketCoefficients& coeffs, double p_theta, double p_phi) {
  double acc = 0.0;
  for (const auto& [m, c] : coeffs) {
    acc += c.value * std::pow(p_theta, m.theta_degree) * std::pow(p_phi, m.phi_degree);
  }
  return acc;
}

SystemPolynomials system_momentum_polynomials(const Params& p) {
  using J = CoefficientJet;
  auto azimuthal = [s = p.s](const J& t) {
    const J st = sin(t);
    return 1.0 / (st * st) + structure::inertia_correction(J(cos(t)), s);
  };
  auto pot = [p](const J& t, const J& f) { return potential_spherical(t, f, p); };

  SystemPolynomials out;
  out.hamiltonian.add({2, 0}, [](const J&, const J&) { return J(0.5); })
      .add({0, 2}, [azimuthal](const J& t, const J&) { return 0.5 * azimuthal(t); })
      .add({0, 0}, pot);

  // F = 2 (K + V) p_phi - p_phi^3 + (A-terms), expanded by monomial.
  out.integral.add({2, 1}, [](const J&, const J&) { return J(1.0); })
      .add({0, 3}, [azimuthal](const J& t, const J&) { return azimuthal(t) - 1.0; })
      .add({0, 1},
           [p, pot](const J& t, const J& f) {
             const J z = cos(t);
             const J root_w = sqrt(structure::height_offset(z, p.s));
             return 2.0 * pot(t, f) + p.A * cos(f) * structure::integral_numerator(z, p.s) / (root_w * sin(t));
           })
      .add({1, 0}, [p](const J& t, const J& f) {
        return 2.0 * p.A * sin(f) * sqrt(structure::height_offset(J(cos(t)), p.s));
      });
  return out;
}

}  // namespace spheretop

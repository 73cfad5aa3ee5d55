#include "spheretop/geometry.hpp"

#include <algorithm>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

namespace spheretop {

std::string to_string(MetricKind k) {
  switch (k) {
    case MetricKind::round: return "round";
    case MetricKind::new_system: return "new-system";
    case MetricKind::goryachev_chaplygin: return "goryachev-chaplygin";
    case MetricKind::geodesic_maupertuis: return "geodesic-maupertuis";
    case MetricKind::gc_geodesic: return "gc-geodesic";
  }
  return "unknown";
}

MetricProfile round_metric() { return {}; }

MetricProfile new_system_metric(const Params& p) {
  MetricProfile m;
  m.kind = MetricKind::new_system;
  m.params = p;
  return m;
}

MetricProfile gc_metric() {
  MetricProfile m;
  m.kind = MetricKind::goryachev_chaplygin;
  return m;
}

MetricProfile maupertuis_metric(const Params& p, double h) {
  MetricProfile m;
  m.kind = MetricKind::geodesic_maupertuis;
  m.params = p;
  m.h = h;
  return m;
}

MetricProfile gc_geodesic_metric(double A1, double h1) {
  MetricProfile m;
  m.kind = MetricKind::gc_geodesic;
  m.A1 = A1;
  m.h = h1;
  return m;
}

namespace {

void check_interior(double theta) {
  if (!(theta > 0.0 && theta < std::numbers::pi)) throw DomainError("curvature: theta must lie in (0, pi)");
}

/// Brioschi formula for E d theta^2 + G d phi^2 given values and derivatives
/// (index 0 = theta, 1 = phi).
struct MetricJet {
  double e, g;
  std::array<double, 2> de, dg;
  std::array<double, 2> dde, ddg;  ///< e_{theta theta}, e_{phi phi}; same for g
};

double brioschi(const MetricJet& j) {
  const double root = std::sqrt(j.e * j.g);
  const double root_t = (j.de[0] * j.g + j.e * j.dg[0]) / (2.0 * root);
  const double root_p = (j.de[1] * j.g + j.e * j.dg[1]) / (2.0 * root);
  const double term_t = j.ddg[0] / root - j.dg[0] * root_t / (root * root);
  const double term_p = j.dde[1] / root - j.de[1] * root_p / (root * root);
  return -(term_t + term_p) / (2.0 * root);
}

}  // namespace

double curvature(const MetricProfile& m, double theta, double phi) {
  check_interior(theta);
  using D1 = Dual<2>;
  using D2 = Dual<2, D1>;
  const D2 th = D2::variable(D1::variable(theta, 0), 0);
  const D2 ph = D2::variable(D1::variable(phi, 1), 1);
  const D2 rho = m.conformal_factor(th, ph);
  const D2 e = rho;
  const D2 g = rho * m.profile_squared(th);
  MetricJet j{};
  j.e = e.value.value;
  j.g = g.value.value;
  for (int i = 0; i < 2; ++i) {
    j.de[i] = e.value.partials[i];
    j.dg[i] = g.value.partials[i];
    j.dde[i] = e.partials[i].partials[i];
    j.ddg[i] = g.partials[i].partials[i];
  }
  return brioschi(j);
}

double curvature_stencil(const MetricProfile& m, double theta, double phi, double h) {
  check_interior(theta);
  if (!(theta - h > 0.0 && theta + h < std::numbers::pi)) throw DomainError("curvature_stencil: step leaves (0, pi)");
  auto e = [&](double t, double p) { return m.conformal_factor(t, p); };
  auto g = [&](double t, double p) { return m.conformal_factor(t, p) * m.profile_squared(t); };
  auto first = [&](auto&& f, int axis, double step) {
    return axis == 0 ? (f(theta + step, phi) - f(theta - step, phi)) / (2.0 * step)
                     : (f(theta, phi + step) - f(theta, phi - step)) / (2.0 * step);
  };
  auto second = [&](auto&& f, int axis, double step) {
    const double c = f(theta, phi);
    return axis == 0 ? (f(theta + step, phi) - 2.0 * c + f(theta - step, phi)) / (step * step)
                     : (f(theta, phi + step) - 2.0 * c + f(theta, phi - step)) / (step * step);
  };
  auto rich = [&](auto&& d, auto&& f, int axis) { return (4.0 * d(f, axis, 0.5 * h) - d(f, axis, h)) / 3.0; };
  MetricJet j{};
  j.e = e(theta, phi);
  j.g = g(theta, phi);
  for (int i = 0; i < 2; ++i) {
    j.de[i] = rich(first, e, i);
    j.dg[i] = rich(first, g, i);
    j.dde[i] = rich(second, e, i);
    j.ddg[i] = rich(second, g, i);
  }
  return brioschi(j);
}

std::vector<double> curvature_profile(const MetricProfile& m, const std::vector<double>& thetas, double phi) {
  std::vector<double> out;
  out.reserve(thetas.size());
  for (double t : thetas) {
    check_interior(t);
    out.push_back(curvature(m, t, phi));
  }
  return out;
}

std::vector<double> interior_theta_grid(std::size_t n) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<double>(i + 1) * std::numbers::pi / static_cast<double>(n + 1);
  return out;
}

PositivityReport positivity_check(double s, std::size_t grid_points) {
  const Params p(0.0, 0.0, s);
  if (grid_points == 0) throw DomainError("positivity_check: empty grid");
  PositivityReport r;
  r.s = s;
  r.grid_points = grid_points;
  r.min_R = r.min_C_form = r.min_eigenvalue = std::numeric_limits<double>::infinity();
  double previous = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid_points; ++i) {
    const double z = -1.0 + 2.0 * static_cast<double>(i + 1) / static_cast<double>(grid_points + 1);
    const double R = structure::positivity_numerator(z, s);
    const double w = structure::height_offset(z, s);
    const double form = structure::azimuthal_coefficient(z, s) * (1.0 - z * z) * w * w;
    if (R < r.min_R) {
      r.min_R = R;
      r.min_R_z = z;
    }
    r.min_C_form = std::min(r.min_C_form, form);
    r.max_identity_residual = std::max(r.max_identity_residual, std::abs(form - R) / std::max(1.0, std::abs(R)));
    r.min_eigenvalue = std::min(r.min_eigenvalue, kinetic_quadratic_form(std::acos(z), p).min_eigenvalue());
    if (R < previous) r.monotone = false;
    previous = R;
  }
  r.R_at_minus_one = structure::positivity_numerator(-1.0, s);
  r.R_endpoint_error = std::abs(r.R_at_minus_one - (s - 1.0) * (s - 1.0));
  return r;
}

std::optional<double> positivity_violation(double s, std::size_t grid_points) {
  for (std::size_t i = 0; i < grid_points; ++i) {
    const double z = -1.0 + 2.0 * static_cast<double>(i + 1) / static_cast<double>(grid_points + 1);
    if (!(structure::positivity_numerator(z, s) > 0.0) || !(structure::height_offset(z, s) > 0.0)) return z;
  }
  return std::nullopt;
}

namespace {

std::array<double, 3> normalized(std::array<double, 3> v) {
  const double n = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
  for (double& x : v) x /= n;
  return v;
}

/// Orthonormal tangent basis at the unit vector r.
std::pair<std::array<double, 3>, std::array<double, 3>> tangent_basis(const std::array<double, 3>& r) {
  const std::array<double, 3> a = std::abs(r[0]) < 0.9 ? std::array<double, 3>{1, 0, 0} : std::array<double, 3>{0, 1, 0};
  const double d = a[0] * r[0] + a[1] * r[1] + a[2] * r[2];
  const auto e1 = normalized({a[0] - d * r[0], a[1] - d * r[1], a[2] - d * r[2]});
  const std::array<double, 3> e2{r[1] * e1[2] - r[2] * e1[1], r[2] * e1[0] - r[0] * e1[2], r[0] * e1[1] - r[1] * e1[0]};
  return {e1, e2};
}

/// Newton ascent of V in tangent-plane coordinates around r.
std::pair<double, std::array<double, 3>> refine_maximum(std::array<double, 3> r, const Params& p) {
  using D1 = Dual<2>;
  using D2 = Dual<2, D1>;
  auto value_at = [&](const std::array<double, 3>& q) { return potential_global(q[0], q[2], p); };
  double best = value_at(r);
  for (int it = 0; it < 100; ++it) {
    const auto [e1, e2] = tangent_basis(r);
    const D2 u = D2::variable(D1::variable(0.0, 0), 0);
    const D2 v = D2::variable(D1::variable(0.0, 1), 1);
    std::array<D2, 3> q;
    for (int i = 0; i < 3; ++i) q[i] = r[i] + u * e1[i] + v * e2[i];
    const D2 n = sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2]);
    const D2 val = potential_global(D2(q[0] / n), D2(q[2] / n), p);
    const double g0 = val.value.partials[0], g1 = val.value.partials[1];
    const double h00 = val.partials[0].partials[0], h01 = val.partials[0].partials[1], h11 = val.partials[1].partials[1];
    if (std::hypot(g0, g1) <= 1e-15) break;
    const double det = h00 * h11 - h01 * h01;
    double d0, d1;
    if (h00 < 0.0 && det > 0.0) {
      d0 = -(h11 * g0 - h01 * g1) / det;
      d1 = -(-h01 * g0 + h00 * g1) / det;
    } else {
      d0 = 0.1 * g0;
      d1 = 0.1 * g1;
    }
    bool improved = false;
    for (int k = 0; k < 40; ++k) {
      const auto trial = normalized({r[0] + d0 * e1[0] + d1 * e2[0], r[1] + d0 * e1[1] + d1 * e2[1],
                                     r[2] + d0 * e1[2] + d1 * e2[2]});
      const double tv = value_at(trial);
      if (tv >= best) {
        improved = tv > best || std::hypot(d0, d1) < 1e-12;
        best = tv;
        r = trial;
        break;
      }
      d0 *= 0.5;
      d1 *= 0.5;
    }
    if (!improved) break;
  }
  return {best, r};
}

}  // namespace

PotentialMaximum locate_max_potential(const Params& p) {
  constexpr int n_theta = 721, n_phi = 1440;
  struct Candidate {
    double value;
    std::array<double, 3> r;
  };
  std::vector<Candidate> grid;
  grid.reserve(static_cast<std::size_t>(n_theta) * n_phi);
  for (int i = 0; i < n_theta; ++i) {
    const double th = std::numbers::pi * i / (n_theta - 1);
    const double st = std::sin(th), ct = std::cos(th);
    const int phis = (i == 0 || i == n_theta - 1) ? 1 : n_phi;
    for (int j = 0; j < phis; ++j) {
      const double ph = 2.0 * std::numbers::pi * j / n_phi;
      const std::array<double, 3> r{-st * std::cos(ph), -st * std::sin(ph), ct};
      grid.push_back({potential_global(r[0], r[2], p), r});
    }
  }
  const std::size_t top = std::min<std::size_t>(16, grid.size());
  std::partial_sort(grid.begin(), grid.begin() + static_cast<std::ptrdiff_t>(top), grid.end(),
                    [](const Candidate& a, const Candidate& b) { return a.value > b.value; });
  PotentialMaximum out;
  out.grid_value = grid.front().value;
  out.value = grid.front().value;
  std::array<double, 3> where = grid.front().r;
  for (std::size_t k = 0; k < top; ++k) {
    const auto [v, r] = refine_maximum(grid[k].r, p);
    if (v > out.value) {
      out.value = v;
      where = r;
    }
  }
  out.position = GlobalState{where[0], where[1], where[2], 0.0, 0.0, 0.0};
  return out;
}

double max_potential(const Params& p) { return locate_max_potential(p).value; }

std::string SignVariant::label() const {
  std::string out = flip_cubic ? "-p^3" : "+p^3";
  out += geodesic_lead ? ",2*Hgeod*p" : ",2*H*p";
  out += flip_potential ? ",-V" : ",+V";
  return out;
}

std::vector<SignVariant> all_sign_variants() {
  std::vector<SignVariant> out;
  for (bool cubic : {false, true})
    for (bool lead : {false, true})
      for (bool pot : {false, true}) out.push_back({cubic, lead, pot});
  return out;
}

SignResolution resolve_sign_variants(const std::function<BracketValue(const SignVariant&, const SphericalState&)>& bracket,
                                     std::size_t states, std::uint64_t seed, double tolerance) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> height(-0.95, 0.95), angle(0.0, 2.0 * std::numbers::pi), mom(-2.0, 2.0);
  std::vector<SphericalState> sample(states);
  for (auto& s : sample) {
    s.theta = std::acos(height(rng));
    s.phi = angle(rng);
    s.p_theta = mom(rng);
    s.p_phi = mom(rng);
  }
  SignResolution out;
  out.states = states;
  out.tolerance = tolerance;
  for (const SignVariant& v : all_sign_variants()) {
    VariantResidual row{v, 0.0, false};
    for (const auto& s : sample) row.max_scaled_residual = std::max(row.max_scaled_residual, bracket(v, s).scaled());
    row.commutes = row.max_scaled_residual <= tolerance;
    if (row.commutes) ++out.commuting;
    out.table.push_back(row);
  }
  if (out.commuting == 1) {
    for (const auto& row : out.table)
      if (row.commutes) out.selected = row.variant;
  }
  return out;
}

namespace {

SignResolution resolve_geodesic(const Params& p, double h, std::size_t states, std::uint64_t seed) {
  const GeodesicHamiltonian hg{p, h};
  return resolve_sign_variants(
      [&](const SignVariant& v, const SphericalState& s) {
        return canonical_bracket_scaled(hg, GeodesicIntegral{p, h, v}, to_array(s));
      },
      states, seed);
}

}  // namespace

MaupertuisSystem maupertuis_system(const Params& p, double h, std::size_t states, std::uint64_t seed) {
  MaupertuisSystem out;
  out.params = p;
  out.h = h;
  out.max_potential = max_potential(p);
  if (!(h > out.max_potential))
    throw DomainError("maupertuis_system: h must exceed the maximum of the potential (" +
                      std::to_string(out.max_potential) + ")");
  out.resolution = resolve_geodesic(p, h, states, seed);
  if (out.resolution.selected) {
    out.variant = *out.resolution.selected;
    return out;
  }
  if (out.resolution.commuting > 1) {
    const Params ref(1.0, 0.5, p.s);
    const SignResolution generic = resolve_geodesic(ref, 2.0 * max_potential(ref), states, seed);
    if (generic.selected) {
      for (const auto& row : out.resolution.table) {
        if (row.commutes && row.variant == *generic.selected) {
          out.variant = row.variant;
          out.resolution.rule = "reference";
          return out;
        }
      }
    }
  }
  throw std::runtime_error("maupertuis_system: sign resolution found " + std::to_string(out.resolution.commuting) +
                           " commuting variants");
}

SphericalState state_on_energy(double theta, double phi, double p_theta, double h, const Params& p) {
  const auto roots = solve_momentum_on_energy(theta, p_theta, phi, h, p);
  if (roots.empty()) throw DomainError("state_on_energy: energy below the pointwise minimum");
  return {theta, phi, p_theta, roots.back()};
}

namespace {

/// Kinetic matrix M (K = p^T M p / 2) and potential in one canonical chart, generic in the scalar.
struct ChartModel {
  const Params& p;
  std::optional<Hemisphere> hemisphere;  ///< empty for the spherical chart

  template <class T>
  T kinetic(const T& q1, const T& q2, const T& p1, const T& p2) const {
    const std::array<T, 4> u{q1, q2, p1, p2};
    return hemisphere ? kinetic_pole(u, *hemisphere, p) : kinetic_spherical(u, p);
  }
  template <class T>
  std::array<T, 3> matrix(const T& q1, const T& q2) const {
    const T a = 2.0 * kinetic(q1, q2, T(1.0), T(0.0));
    const T d = 2.0 * kinetic(q1, q2, T(0.0), T(1.0));
    const T b = kinetic(q1, q2, T(1.0), T(1.0)) - 0.5 * (a + d);
    return {a, b, d};
  }
  template <class T>
  T potential(const T& q1, const T& q2) const {
    return hemisphere ? potential_global(q1, pole_height(q1, q2, *hemisphere), p) : potential_spherical(q1, q2, p);
  }
};

}  // namespace

double geodesic_residual_at(const Params& p, double h, const CanonicalState& state) {
  const bool pole = std::holds_alternative<PoleChartState>(state);
  const ChartModel model{p, pole ? std::optional<Hemisphere>(std::get<PoleChartState>(state).hemisphere)
                                 : std::nullopt};
  const std::array<double, 4> u = std::visit([](const auto& s) { return to_array(s); }, state);
  const std::array<double, 4> field =
      std::visit([&](const auto& s) { return hamiltonian_vector_field(s, p); }, state);

  // time derivatives along the H-flow via a directional dual
  using E = Dual<1>;
  std::array<E, 4> ue;
  for (int i = 0; i < 4; ++i) {
    ue[i] = E(u[i]);
    ue[i].partials[0] = field[i];
  }
  const auto me = model.matrix(ue[0], ue[1]);
  const E v1 = me[0] * ue[2] + me[1] * ue[3];
  const E v2 = me[1] * ue[2] + me[2] * ue[3];
  const E rho_e = h - model.potential(ue[0], ue[1]);
  const double rho = rho_e.value;
  if (!(rho > 0.0)) throw std::logic_error("geodesic check: h - V is not positive along the trajectory");
  const double rho_dot = rho_e.partials[0];
  const std::array<double, 2> qd{v1.value, v2.value};
  const std::array<double, 2> qdd{v1.partials[0], v2.partials[0]};
  std::array<double, 2> q1, q2;  // first and second derivatives in tau
  for (int i = 0; i < 2; ++i) {
    q1[i] = qd[i] / rho;
    q2[i] = (qdd[i] - qd[i] * rho_dot / rho) / (rho * rho);
  }

  // conformal metric g = rho M^{-1} and its position derivatives
  using D = Dual<2>;
  const D x = D::variable(u[0], 0), y = D::variable(u[1], 1);
  const auto m = model.matrix(x, y);
  const D r = h - model.potential(x, y);
  const D det = m[0] * m[2] - m[1] * m[1];
  const std::array<std::array<D, 2>, 2> g{{{r * m[2] / det, -r * m[1] / det}, {-r * m[1] / det, r * m[0] / det}}};
  const double gd = g[0][0].value * g[1][1].value - g[0][1].value * g[1][0].value;
  const std::array<std::array<double, 2>, 2> ginv{
      {{g[1][1].value / gd, -g[0][1].value / gd}, {-g[1][0].value / gd, g[0][0].value / gd}}};
  std::array<double, 2> acc = q2;
  for (int k = 0; k < 2; ++k) {
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        double gamma = 0.0;
        for (int l = 0; l < 2; ++l)
          gamma += 0.5 * ginv[k][l] * (g[l][j].partials[i] + g[l][i].partials[j] - g[i][j].partials[l]);
        acc[k] += gamma * q1[i] * q1[j];
      }
    }
  }
  double norm2 = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) norm2 += g[i][j].value * acc[i] * acc[j];
  return std::sqrt(std::max(0.0, norm2));
}

GeodesicReport geodesic_correspondence_check(const MaupertuisSystem& system, const SphericalState& initial,
                                             const IntegratorConfig& config) {
  const Params& p = system.params;
  const double h = system.h;
  if (!(std::abs(hamiltonian(initial, p) - h) <= 1e-10))
    throw DomainError("geodesic_correspondence_check: initial state is not on H = h");
  const Trajectory tr = integrate(CanonicalState{initial}, p, config);
  const GeodesicIntegral f = system.integral();
  const double f0 = f(to_array(tr.samples.front().state));
  const double scale = std::max(std::abs(f0), 1.0);
  GeodesicReport out;
  out.samples = tr.samples.size();
  double prev_rho = 0.0, prev_t = 0.0;
  for (std::size_t i = 0; i < tr.samples.size(); ++i) {
    const Sample& smp = tr.samples[i];
    const CanonicalState chart = choose_chart(smp.state, config);
    out.max_geodesic_residual = std::max(out.max_geodesic_residual, geodesic_residual_at(p, h, chart));
    out.max_relative_F_drift = std::max(out.max_relative_F_drift, std::abs(f(to_array(smp.state)) - f0) / scale);
    out.max_energy_residual = std::max(out.max_energy_residual, std::abs(smp.H - h));
    const double rho = h - potential_global(smp.state.x, smp.state.z, p);
    const double speed2 = 2.0 * kinetic_energy(smp.state, p) / rho;
    out.max_geodesic_speed_error = std::max(out.max_geodesic_speed_error, std::abs(speed2 - 2.0));
    if (i > 0) out.tau_end += 0.5 * (rho + prev_rho) * (smp.t - prev_t);
    prev_rho = rho;
    prev_t = smp.t;
  }
  return out;
}

}  // namespace spheretop

#include "spheretop/dynamics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "spheretop/bracket.hpp"

namespace spheretop {

namespace {

double global_distance(const GlobalState& a, const GlobalState& b) {
  const auto u = to_array(a);
  const auto v = to_array(b);
  double m = 0.0;
  for (int i = 0; i < 6; ++i) m = std::max(m, std::abs(u[i] - v[i]));
  return m;
}

template <class State>
StepResult midpoint_in_chart(const State& s0, double dt, const Params& p, double tolerance, int max_iterations,
                             auto&& rebuild) {
  const auto u0 = to_array(s0);
  auto field = [&](const std::array<double, 4>& u) { return hamiltonian_vector_field(rebuild(u), p); };
  auto u1 = u0;
  if (dt == 0.0) return {rebuild(u0), 0, 0.0};
  const auto f0 = field(u0);
  for (int i = 0; i < 4; ++i) u1[i] = u0[i] + dt * f0[i];
  double increment = 0.0;
  for (int it = 1; it <= max_iterations; ++it) {
    std::array<double, 4> mid;
    for (int i = 0; i < 4; ++i) mid[i] = 0.5 * (u0[i] + u1[i]);
    const auto f = field(mid);
    increment = 0.0;
    for (int i = 0; i < 4; ++i) {
      const double next = u0[i] + dt * f[i];
      increment = std::max(increment, std::abs(next - u1[i]) / std::max(1.0, std::abs(next)));
      u1[i] = next;
    }
    if (!std::isfinite(increment)) break;
    if (increment <= tolerance) return {rebuild(u1), it, increment};
  }
  throw ConvergenceError("implicit midpoint: fixed-point iteration did not converge (reduce dt)", increment,
                         max_iterations);
}

struct Recorder {
  Trajectory& trajectory;
  const Params& params;

  void record(double t, const CanonicalState& s) { record(t, to_global(s)); }

  void record(double t, const GlobalState& raw) {
    const auto [r, d] = casimir_residuals(raw);
    trajectory.max_casimir_residual = std::max({trajectory.max_casimir_residual, std::abs(r), std::abs(d)});
    const GlobalState g = project_to_casimir_level(raw);
    trajectory.samples.push_back({t, g, hamiltonian(g, params), integral_F(g, params)});
  }
};

/// Switch charts when the state leaves its band; returns the global-chart jump.
double apply_switch(CanonicalState& s, const IntegratorConfig& c) {
  const CanonicalState before = s;
  if (const auto* sph = std::get_if<SphericalState>(&s)) {
    const double z = std::cos(sph->theta);
    if (std::abs(z) <= c.switch_high) return -1.0;
    s = spherical_to_pole(*sph, z > 0 ? Hemisphere::north : Hemisphere::south);
  } else {
    const auto& pole = std::get<PoleChartState>(s);
    if (std::abs(pole.z()) >= c.switch_low) return -1.0;
    s = pole_to_spherical(pole);
  }
  return global_distance(to_global(before), to_global(s));
}

/// sin(phi - phi_star) and cos(phi - phi_star) from the embedding.
std::pair<double, double> section_function(const GlobalState& g, double phi_star) {
  const double rho = std::hypot(g.x, g.y);
  const double cs = std::cos(phi_star);
  const double sn = std::sin(phi_star);
  return {(-g.y * cs + g.x * sn) / rho, (-g.x * cs - g.y * sn) / rho};
}

}  // namespace

void IntegratorConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("integrator: dt must be positive and finite");
  if (!std::isfinite(t_end)) throw ConfigError("integrator: t_end must be finite");
  if (!(tolerance > 0.0)) throw ConfigError("integrator: tolerance must be positive");
  if (max_iterations < 1) throw ConfigError("integrator: max_iterations must be at least 1");
  if (!(switch_low > 0.0 && switch_low < switch_high && switch_high < 1.0))
    throw ConfigError("integrator: chart-switch band must satisfy 0 < low < high < 1");
  if (stride == 0) throw ConfigError("integrator: stride must be at least 1");
}

std::size_t IntegratorConfig::steps() const { return static_cast<std::size_t>(std::llround(std::abs(t_end) / dt)); }

StepResult step_implicit_midpoint_detailed(const CanonicalState& state, double dt, const Params& p, double tolerance,
                                           int max_iterations) {
  if (const auto* sph = std::get_if<SphericalState>(&state)) {
    StepResult r = midpoint_in_chart(*sph, dt, p, tolerance, max_iterations,
                                     [](const std::array<double, 4>& u) { return spherical_from_array(u); });
    auto& out = std::get<SphericalState>(r.state);
    out.phi = wrap_angle(out.phi);
    validate(out);
    return r;
  }
  const auto& pole = std::get<PoleChartState>(state);
  const Hemisphere h = pole.hemisphere;
  StepResult r = midpoint_in_chart(pole, dt, p, tolerance, max_iterations,
                                   [h](const std::array<double, 4>& u) { return pole_from_array(u, h); });
  validate(std::get<PoleChartState>(r.state));
  return r;
}

CanonicalState step_implicit_midpoint(const CanonicalState& state, double dt, const Params& p, double tolerance,
                                      int max_iterations) {
  return step_implicit_midpoint_detailed(state, dt, p, tolerance, max_iterations).state;
}

CanonicalState choose_chart(const CanonicalState& state, const IntegratorConfig& config) {
  if (const auto* sph = std::get_if<SphericalState>(&state)) {
    validate(*sph);
    SphericalState s = *sph;
    s.phi = wrap_angle(s.phi);
    const double z = std::cos(s.theta);
    if (std::abs(z) > config.switch_high) return spherical_to_pole(s, z > 0 ? Hemisphere::north : Hemisphere::south);
    return s;
  }
  const auto& pole = std::get<PoleChartState>(state);
  validate(pole);
  if (std::abs(pole.z()) < config.switch_low) return pole_to_spherical(pole);
  return pole;
}

CanonicalState choose_chart(const GlobalState& state, const IntegratorConfig& config) {
  validate(state);
  if (std::abs(state.z) > config.switch_high) return global_to_pole(state);
  return global_to_spherical(state);
}

Trajectory integrate(const CanonicalState& initial, const Params& p, const IntegratorConfig& config) {
  config.validate();
  Trajectory tr;
  Recorder rec{tr, p};
  CanonicalState s = choose_chart(initial, config);
  const double h = config.t_end < 0 ? -config.dt : config.dt;
  const std::size_t n = config.steps();
  rec.record(0.0, s);
  for (std::size_t k = 1; k <= n; ++k) {
    try {
      const StepResult r = step_implicit_midpoint_detailed(s, h, p, config.tolerance, config.max_iterations);
      s = r.state;
      tr.max_fixed_point_iterations = std::max(tr.max_fixed_point_iterations, r.iterations);
    } catch (const ConvergenceError& e) {
      tr.drift = drift_report(tr.samples);
      throw IntegrationError(std::string(e.what()) + " at step " + std::to_string(k), std::move(tr), e.residual(), k);
    } catch (const DomainError& e) {
      tr.drift = drift_report(tr.samples);
      throw IntegrationError(std::string("state left the chart domain at step ") + std::to_string(k) + ": " + e.what(),
                             std::move(tr), 0.0, k);
    }
    const double jump = apply_switch(s, config);
    if (jump >= 0.0) {
      ++tr.chart_switches;
      tr.max_switch_discontinuity = std::max(tr.max_switch_discontinuity, jump);
    }
    if (k % config.stride == 0 || k == n) rec.record(static_cast<double>(k) * h, s);
  }
  tr.drift = drift_report(tr.samples);
  return tr;
}

Trajectory integrate(const GlobalState& initial, const Params& p, const IntegratorConfig& config) {
  config.validate();
  return integrate(choose_chart(initial, config), p, config);
}

Trajectory integrate_rk4_global(const GlobalState& initial, const Params& p, const IntegratorConfig& config) {
  config.validate();
  validate(initial);
  Trajectory tr;
  Recorder rec{tr, p};
  const double h = config.t_end < 0 ? -config.dt : config.dt;
  const std::size_t n = config.steps();
  auto u = to_array(initial);
  auto field = [&](const std::array<double, 6>& v) { return hamiltonian_vector_field(global_from_array(v), p); };
  auto shifted = [&](const std::array<double, 6>& k, double a) {
    auto v = u;
    for (int i = 0; i < 6; ++i) v[i] += a * k[i];
    return v;
  };
  rec.record(0.0, initial);
  for (std::size_t k = 1; k <= n; ++k) {
    const auto k1 = field(u);
    const auto k2 = field(shifted(k1, h / 2));
    const auto k3 = field(shifted(k2, h / 2));
    const auto k4 = field(shifted(k3, h));
    for (int i = 0; i < 6; ++i) u[i] += h / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
    if (k % config.stride == 0 || k == n) rec.record(static_cast<double>(k) * h, global_from_array(u));
  }
  tr.drift = drift_report(tr.samples);
  return tr;
}

namespace {

SlopeFit fit_slope(const std::vector<double>& t, const std::vector<double>& d) {
  const std::size_t n = t.size();
  std::vector<double> bt, bd;
  constexpr std::size_t blocks = 10;
  if (n >= 2 * blocks) {
    for (std::size_t b = 0; b < blocks; ++b) {
      const std::size_t lo = b * n / blocks, hi = (b + 1) * n / blocks;
      double st = 0.0, sd = 0.0;
      for (std::size_t i = lo; i < hi; ++i) {
        st += t[i];
        sd += d[i];
      }
      bt.push_back(st / static_cast<double>(hi - lo));
      bd.push_back(sd / static_cast<double>(hi - lo));
    }
  } else {
    bt = t;
    bd = d;
  }
  const std::size_t m = bt.size();
  SlopeFit fit;
  if (m < 3) return fit;
  double mt = 0.0, md = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    mt += bt[i];
    md += bd[i];
  }
  mt /= static_cast<double>(m);
  md /= static_cast<double>(m);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    sxx += (bt[i] - mt) * (bt[i] - mt);
    sxy += (bt[i] - mt) * (bd[i] - md);
  }
  if (sxx == 0.0) return fit;
  fit.slope = sxy / sxx;
  double ssr = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double e = bd[i] - md - fit.slope * (bt[i] - mt);
    ssr += e * e;
  }
  fit.standard_error = std::sqrt(ssr / static_cast<double>(m - 2) / sxx);
  fit.secular = std::abs(fit.slope) > 3.0 * fit.standard_error;
  return fit;
}

}  // namespace

DriftSummary drift_report(const std::vector<Sample>& samples) {
  DriftSummary out;
  if (samples.empty()) return out;
  const double h0 = samples.front().H;
  const double f0 = samples.front().F;
  const double hs = std::max(std::abs(h0), 1.0);
  const double fs = std::max(std::abs(f0), 1.0);
  std::vector<double> t, dh, df;
  for (const Sample& s : samples) {
    t.push_back(s.t);
    dh.push_back((s.H - h0) / hs);
    df.push_back((s.F - f0) / fs);
    out.max_relative_H = std::max(out.max_relative_H, std::abs(dh.back()));
    out.max_relative_F = std::max(out.max_relative_F, std::abs(df.back()));
  }
  out.H_slope = fit_slope(t, dh);
  out.F_slope = fit_slope(t, df);
  return out;
}

DriftSummary drift_report(const Trajectory& trajectory) { return drift_report(trajectory.samples); }

std::vector<double> solve_momentum_on_energy(double theta, double p_theta, double phi, double E, const Params& p) {
  const SphericalState probe{theta, phi, p_theta, 0.0};
  validate(probe);
  const double base = hamiltonian(probe, p);
  const double c = 2.0 * kinetic_energy(SphericalState{theta, phi, 0.0, 1.0}, p);
  const double d = E - base;
  if (d < 0.0) return {};
  if (d == 0.0) return {0.0};
  const double r = std::sqrt(2.0 * d / c);
  return {-r, r};
}

std::string to_string(SectionStatus s) {
  switch (s) {
    case SectionStatus::ok: return "ok";
    case SectionStatus::infeasible: return "infeasible";
    case SectionStatus::no_crossing: return "no_crossing";
    case SectionStatus::failed: return "failed";
  }
  return "unknown";
}

namespace {

SectionResult section_one(const SphericalState& seed, const Params& p, const SectionConfig& sec,
                          const IntegratorConfig& config) {
  SectionResult out;
  CanonicalState s;
  try {
    s = choose_chart(CanonicalState{seed}, config);
    const double residual = std::abs(hamiltonian(seed, p) - sec.energy);
    if (!(residual <= sec.energy_tolerance)) {
      out.status = SectionStatus::infeasible;
      out.message = "seed is off the energy level by " + std::to_string(residual);
      return out;
    }
  } catch (const DomainError& e) {
    out.status = SectionStatus::infeasible;
    out.message = e.what();
    return out;
  }

  const double sign = config.t_end < 0 ? -1.0 : 1.0;
  const double h = sign * config.dt;
  const std::size_t n = config.steps();
  auto g_of = [&](const CanonicalState& c) { return section_function(to_global(c), sec.phi_star); };
  try {
    auto [g_prev, cos_prev] = g_of(s);
    for (std::size_t k = 1; k <= n; ++k) {
      const CanonicalState prev = s;
      s = step_implicit_midpoint(prev, h, p, config.tolerance, config.max_iterations);
      const auto [g_new, cos_new] = g_of(s);
      if (sign * g_prev < 0.0 && sign * g_new >= 0.0 && cos_prev > 0.0 && cos_new > 0.0) {
        // Illinois iteration on the partial step length.
        double a = 0.0, ga = g_prev, b = h, gb = g_new;
        CanonicalState at = s;
        for (int it = 0; it < 200 && std::abs(gb) > sec.tolerance; ++it) {
          const double c = b - gb * (b - a) / (gb - ga);
          at = step_implicit_midpoint(prev, c, p, config.tolerance, config.max_iterations);
          const double gc = g_of(at).first;
          if ((gc > 0) != (gb > 0)) {
            a = b;
            ga = gb;
          } else {
            ga *= 0.5;
          }
          b = c;
          gb = gc;
        }
        if (std::abs(gb) > sec.tolerance) {
          out.status = SectionStatus::failed;
          out.message = "crossing refinement did not converge";
          return out;
        }
        const SphericalState hit = std::holds_alternative<SphericalState>(at)
                                       ? std::get<SphericalState>(at)
                                       : pole_to_spherical(std::get<PoleChartState>(at));
        const double residual = std::abs(hamiltonian(at, p) - sec.energy);
        if (!(residual <= sec.energy_tolerance)) {
          out.status = SectionStatus::failed;
          out.message = "energy residual " + std::to_string(residual) + " exceeds tolerance at crossing " +
                        std::to_string(out.points.size()) + " (reduce dt)";
          return out;
        }
        out.points.push_back({out.points.size(), static_cast<double>(k - 1) * h + b, hit.theta, hit.p_theta, residual});
      }
      apply_switch(s, config);
      g_prev = g_new;
      cos_prev = cos_new;
    }
  } catch (const std::exception& e) {
    out.status = SectionStatus::failed;
    out.message = e.what();
    return out;
  }
  if (out.points.empty()) {
    out.status = SectionStatus::no_crossing;
    out.message = "no crossing within t_end";
  }
  return out;
}

}  // namespace

std::vector<SectionResult> poincare_section(const std::vector<SphericalState>& seeds, const Params& p,
                                            const SectionConfig& section, const IntegratorConfig& config,
                                            unsigned threads) {
  config.validate();
  std::vector<SectionResult> out(seeds.size());
  const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(seeds.size())));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < seeds.size(); i = next++) out[i] = section_one(seeds[i], p, section, config);
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  return out;
}

double integrable_curve_thickness(const std::vector<SectionPoint>& points, double E, const Params& p) {
  if (p.A != 0.0) throw DomainError("integrable_curve_thickness requires A = 0");
  if (points.size() < 2) throw DomainError("integrable_curve_thickness needs at least 2 points");
  using D = Dual<1>;
  struct Row {
    D c, v;
    double p_theta;
  };
  std::vector<Row> rows;
  double num = 0.0, den = 0.0;
  for (const SectionPoint& pt : points) {
    const D th = D::variable(pt.theta, 0);
    const D c = 2.0 * kinetic_spherical(std::array<D, 4>{th, D(0.0), D(0.0), D(1.0)}, p);
    const D v = potential_spherical(th, D(0.0), p);
    const double a = 0.5 * c.value;
    const double b = E - v.value - 0.5 * pt.p_theta * pt.p_theta;
    num += a * b;
    den += a * a;
    rows.push_back({c, v, pt.p_theta});
  }
  const double q = num / den;
  double worst = 0.0;
  for (const Row& r : rows) {
    const double g = 0.5 * r.p_theta * r.p_theta + 0.5 * r.c.value * q + r.v.value - E;
    const double gt = 0.5 * r.c.partials[0] * q + r.v.partials[0];
    worst = std::max(worst, std::abs(g) / std::hypot(gt, r.p_theta));
  }
  return worst;
}

}  // namespace spheretop

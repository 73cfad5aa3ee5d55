#include "cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <variant>

#include "spheretop/bracket.hpp"
#include "spheretop/charts.hpp"
#include "spheretop/errors.hpp"
#include "spheretop/exact_identities.hpp"

namespace spheretop::cli {

using io::Json;

namespace {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
  SphericalState spherical(double z_max = 0.95, double p_max = 2.0) {
    const double z = uniform(-z_max, z_max);
    return {std::acos(z), uniform(0.0, 2.0 * std::numbers::pi), uniform(-p_max, p_max), uniform(-p_max, p_max)};
  }
  GlobalState global(double l_max = 2.0) {
    std::normal_distribution<double> n(0.0, 1.0);
    double x = n(engine_), y = n(engine_), z = n(engine_);
    const double r = std::sqrt(x * x + y * y + z * z);
    x /= r;
    y /= r;
    z /= r;
    const double lx = uniform(-l_max, l_max), ly = uniform(-l_max, l_max), lz = uniform(-l_max, l_max);
    const double dot = x * lx + y * ly + z * lz;
    return {x, y, z, lx - dot * x, ly - dot * y, lz - dot * z};
  }

 private:
  std::mt19937_64 engine_;
};

double gc_curvature_closed_form(double theta) {
  const double s2 = std::sin(theta) * std::sin(theta);
  return (10.0 - 6.0 * s2) / ((1.0 + 3.0 * s2) * (1.0 + 3.0 * s2));
}

double relative(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

CheckResult below(std::string name, double value, double tolerance, std::string note = {}) {
  return {std::move(name), value <= tolerance, value, tolerance, false, std::move(note)};
}

std::filesystem::path write_output(const RunConfig& config, const std::string& name, const std::string& content,
                                   CommandOutcome& outcome) {
  const std::filesystem::path path = config.output.dir / name;
  io::write_file_atomic(path, content);
  outcome.files.push_back(path);
  return path;
}

Json config_echo(const RunConfig& c) {
  Json j;
  j["command"] = to_string(c.command);
  j["seed"] = c.seed;
  j["params"] = io::params_json(c.params);
  return j;
}

Json integrator_json(const IntegratorConfig& c) {
  return Json{{"dt", c.dt}, {"t_end", c.t_end}, {"tolerance", c.tolerance}, {"max_iterations", c.max_iterations},
              {"switch_low", c.switch_low}, {"switch_high", c.switch_high}, {"stride", c.stride}};
}

}  // namespace

double default_maupertuis_energy(const Params& p) {
  const double v = max_potential(p);
  return v > 0.0 ? 2.0 * v : v + 1.0;
}

// ---- verify ----------------------------------------------------------------

std::vector<CheckResult> verification_checks(const RunConfig& config) {
  const Params& p = config.params;
  const Grids& g = config.grids;
  Rng rng(config.seed);
  std::vector<CheckResult> out;

  // identities
  {
    double worst = 0.0;
    const double s_max = std::max(5.0, p.s);
    for (std::size_t k = 0; k < g.identity_samples; ++k) {
      const auto [rq, rp] = check_identities(rng.uniform(-1.0, 1.0), rng.uniform(1.0 + 1e-12, s_max));
      worst = std::max({worst, std::abs(rq), std::abs(rp)});
    }
    out.push_back(below("identities.structure_residual", worst, 1e-14));
    std::string failed;
    for (const auto& c : exact::check_structure_identities())
      if (!c.holds) failed += (failed.empty() ? "" : ", ") + c.name + " = " + c.residual;
    out.push_back({"identities.exact_integer", failed.empty(), failed.empty() ? 0.0 : 1.0, 0.0, false, failed});
  }

  // brackets in every chart
  {
    double sph = 0.0, pole = 0.0, lp = 0.0;
    for (std::size_t k = 0; k < g.bracket_states; ++k) {
      const SphericalState s = rng.spherical();
      sph = std::max(sph, canonical_bracket_scaled(SphericalHamiltonian{p}, SphericalIntegral{p}, to_array(s)).scaled());
      const Hemisphere hemi = std::cos(s.theta) >= 0.0 ? Hemisphere::north : Hemisphere::south;
      const PoleChartState pc = spherical_to_pole(s, hemi);
      pole = std::max(pole,
                      canonical_bracket_scaled(PoleHamiltonian{p, hemi}, PoleIntegral{p, hemi}, to_array(pc)).scaled());
      lp = std::max(lp, lie_poisson_bracket_scaled(GlobalHamiltonian{p}, GlobalIntegral{p}, rng.global()).scaled());
    }
    for (Hemisphere hemi : {Hemisphere::north, Hemisphere::south}) {
      const std::array<double, 4> at_pole{0.0, 0.0, 0.7, -0.4};
      pole = std::max(pole, canonical_bracket_scaled(PoleHamiltonian{p, hemi}, PoleIntegral{p, hemi}, at_pole).scaled());
    }
    out.push_back(below("brackets.spherical", sph, 1e-9));
    out.push_back(below("brackets.pole", pole, 1e-9));
    out.push_back(below("brackets.lie_poisson", lp, 1e-9));
  }

  // degree decomposition
  {
    const SystemPolynomials sys = system_momentum_polynomials(p);
    double worst = 0.0;
    bool exact_zero = true;
    for (std::size_t k = 0; k < g.degree_basepoints; ++k) {
      const SphericalState s = rng.spherical();
      for (const auto& [m, c] : bracket_degree_decomposition(sys.hamiltonian, sys.integral, s.theta, s.phi)) {
        worst = std::max(worst, c.scaled());
        exact_zero = exact_zero && c.value == 0.0;
      }
    }
    if (p.A == 0.0) {
      out.push_back({"degree_decomposition", exact_zero, worst, 0.0, false,
                     "trivially zero: A = 0, every coefficient vanishes identically"});
    } else {
      out.push_back(below("degree_decomposition", worst, 1e-10));
    }
  }

  // chart gluing on the overlap 0.1 <= |z| <= 0.95, where the pole chart is well conditioned
  {
    double dh = 0.0, df = 0.0, dshort = 0.0;
    for (std::size_t k = 0; k < g.chart_points; ++k) {
      SphericalState s = rng.spherical();
      const double z = (rng.uniform(0.0, 1.0) < 0.5 ? -1.0 : 1.0) * rng.uniform(0.1, 0.95);
      s.theta = std::acos(z);
      const double h = hamiltonian(s, p), f = integral_F(s, p);
      const Hemisphere hemi = std::cos(s.theta) >= 0.0 ? Hemisphere::north : Hemisphere::south;
      const PoleChartState pc = spherical_to_pole(s, hemi);
      const GlobalState gs = spherical_to_global(s);
      dh = std::max({dh, relative(hamiltonian(pc, p), h), relative(hamiltonian(gs, p), h)});
      df = std::max({df, relative(integral_F(pc, p), f)});
      dshort = std::max(dshort, relative(integral_F(gs, p), f));
    }
    out.push_back(below("charts.H_agreement", dh, 1e-11));
    out.push_back(below("charts.F_agreement", df, 1e-11));
    out.push_back(below("charts.F_global_short_form", dshort, 1e-11));
  }

  // positivity
  {
    const PositivityReport r = positivity_check(p.s, g.positivity_points);
    out.push_back({"positivity.min_R", r.min_R > 0.0, r.min_R, 0.0, false, "min R over the z-grid must be > 0"});
    out.push_back({"positivity.min_C_form", r.min_C_form > 0.0, r.min_C_form, 0.0, false, ""});
    out.push_back(below("positivity.R_at_minus_one", r.R_endpoint_error, 1e-12));
    out.push_back(below("positivity.identity_residual", r.max_identity_residual, 1e-12));
    double min_eig = std::numeric_limits<double>::infinity();
    const std::size_t n = std::max<std::size_t>(g.eigen_grid, 2);
    for (std::size_t i = 0; i < n; ++i) {
      const double theta = std::numbers::pi * (i + 0.5) / n;
      min_eig = std::min(min_eig, kinetic_quadratic_form(theta, p).min_eigenvalue());
      for (std::size_t j = 0; j < n; ++j) {
        const double x = -0.95 + 1.9 * i / (n - 1), y = -0.95 + 1.9 * j / (n - 1);
        if (x * x + y * y >= 0.95 * 0.95) continue;
        for (Hemisphere hemi : {Hemisphere::north, Hemisphere::south})
          min_eig = std::min(min_eig, kinetic_quadratic_form(x, y, hemi, p).min_eigenvalue());
      }
    }
    out.push_back({"positivity.kinetic_eigenvalue", min_eig > 0.0, min_eig, 0.0, false,
                   "min eigenvalue of the kinetic form over spherical and pole-chart grids"});
  }

  // curvature oracles
  {
    const auto thetas = interior_theta_grid(g.curvature_points);
    double round = 0.0, gc = 0.0, stencil = 0.0, lo = INFINITY, hi = -INFINITY;
    const MetricProfile m = new_system_metric(p);
    for (double t : thetas) {
      round = std::max(round, std::abs(curvature(round_metric(), t) - 1.0));
      gc = std::max(gc, std::abs(curvature_stencil(gc_metric(), t) - gc_curvature_closed_form(t)));
      const double k = curvature(m, t);
      stencil = std::max(stencil, relative(curvature_stencil(m, t), k));
      lo = std::min(lo, k);
      hi = std::max(hi, k);
    }
    out.push_back(below("curvature.round", round, 1e-8));
    out.push_back(below("curvature.gc_closed_form", gc, 1e-6));
    out.push_back(below("curvature.new_dual_vs_stencil", stencil, 1e-5));
    out.push_back({"curvature.new_nonconstant", hi - lo > 0.0, hi - lo, 0.0, false, "spread max - min"});
  }

  // reference family
  {
    double worst = 0.0;
    for (std::size_t k = 0; k < g.bracket_states; ++k) {
      const SphericalState s = rng.spherical();
      worst = std::max(worst, canonical_bracket_scaled(GCHamiltonian{config.gc.A1}, GCIntegral{config.gc.A1},
                                                       to_array(s)).scaled());
    }
    out.push_back(below("gc.brackets", worst, 1e-9));
    try {
      const GCGeodesicSystem sys = gc_geodesic_system(config.gc, g.sign_states, config.seed);
      out.push_back({"gc.geodesic_sign_resolution", true, static_cast<double>(sys.resolution.commuting), 0.0, false,
                     sys.variant.label() + " (" + sys.resolution.rule + ")"});
    } catch (const std::exception& e) {
      out.push_back({"gc.geodesic_sign_resolution", false, 0.0, 0.0, false, e.what()});
    }
  }

  // Maupertuis sign resolution
  {
    const double h = config.h.value_or(default_maupertuis_energy(p));
    try {
      const MaupertuisSystem sys = maupertuis_system(p, h, g.sign_states, config.seed);
      out.push_back({"maupertuis.sign_resolution", true, static_cast<double>(sys.resolution.commuting), 0.0, false,
                     sys.variant.label() + " (" + sys.resolution.rule + ")"});
    } catch (const std::exception& e) {
      out.push_back({"maupertuis.sign_resolution", false, 0.0, 0.0, false, e.what()});
    }
  }

  // equations of motion against the printed complex form (c = 0 only), informational
  if (p.c == 0.0) {
    double literal = 0.0, reversed = 0.0;
    for (std::size_t k = 0; k < 200; ++k) {
      const EomCheck e = eom_complex_residual(rng.global(), p);
      literal = std::max({literal, e.xi_residual, e.eta_residual, e.z_dot_residual, e.lz_dot_residual});
      reversed = std::max({reversed, e.xi_residual_reversed, e.eta_residual_reversed, e.z_dot_residual_reversed,
                           e.lz_dot_residual_reversed});
    }
    out.push_back({"eom.printed", literal <= 1e-10, literal, 1e-10, true,
                   "printed equations use the reversed time orientation; reversed residual " +
                       io::format_double(reversed)});
  }
  return out;
}

Json verification_report(const std::vector<CheckResult>& checks, const RunConfig& config) {
  Json arr = Json::array();
  bool all = true;
  std::string first;
  for (const CheckResult& c : checks) {
    Json j{{"name", c.name}, {"passed", c.passed}, {"value", c.value}, {"tolerance", c.tolerance}};
    if (c.informational) j["informational"] = true;
    if (!c.note.empty()) j["note"] = c.note;
    arr.push_back(j);
    if (!c.informational && !c.passed) {
      if (all) first = c.name;
      all = false;
    }
  }
  Json r = config_echo(config);
  r["passed"] = all;
  if (!all) r["first_failure"] = first;
  r["degree_decomposition_trivially_zero"] = config.params.A == 0.0;
  r["checks"] = arr;
  return r;
}

CommandOutcome cmd_verify(const RunConfig& config) {
  CommandOutcome o;
  const auto checks = verification_checks(config);
  o.report = verification_report(checks, config);
  if (!o.report["passed"].get<bool>()) {
    o.exit_code = kExitVerificationFailure;
    o.message = "verification failed: " + o.report["first_failure"].get<std::string>();
  }
  if (config.output.json()) write_output(config, "verify.json", o.report.dump(2) + "\n", o);
  return o;
}

// ---- simulate --------------------------------------------------------------

CommandOutcome cmd_simulate(const RunConfig& config) {
  CommandOutcome o;
  Trajectory tr;
  std::string status = "ok";
  try {
    tr = std::visit(
        [&](const auto& s) -> Trajectory {
          using S = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<S, GlobalState>) {
            return integrate(s, config.params, config.integrator);
          } else {
            return integrate(CanonicalState{s}, config.params, config.integrator);
          }
        },
        config.initial);
  } catch (const IntegrationError& e) {
    tr = e.partial();
    status = "failed";
    o.exit_code = kExitRuntimeError;
    o.message = std::string("integration failed at step ") + std::to_string(e.step()) + ": " + e.what();
  }
  io::CsvTable csv = io::trajectory_csv(tr);
  csv.footer.push_back("status=" + status);
  o.report = config_echo(config);
  o.report["integrator"] = integrator_json(config.integrator);
  o.report["status"] = status;
  if (!o.message.empty()) o.report["message"] = o.message;
  o.report["trajectory"] = io::trajectory_summary_json(tr);
  if (config.output.csv()) write_output(config, "trajectory.csv", io::write_csv(csv), o);
  if (config.output.json()) write_output(config, "trajectory.json", o.report.dump(2) + "\n", o);
  return o;
}

// ---- section ---------------------------------------------------------------

CommandOutcome cmd_section(const RunConfig& config, unsigned threads) {
  CommandOutcome o;
  const Params& p = config.params;
  const SectionConfig& sec = config.section;
  std::vector<SectionResult> results(config.seeds.size());
  std::vector<SphericalState> feasible;
  std::vector<std::size_t> feasible_index;
  Json seeds = Json::array();
  for (std::size_t i = 0; i < config.seeds.size(); ++i) {
    const SeedSpec& spec = config.seeds[i];
    SphericalState s{spec.theta, spec.phi.value_or(sec.phi_star), spec.p_theta, 0.0};
    bool completed = false;
    if (spec.p_phi) {
      s.p_phi = *spec.p_phi;
    } else {
      const auto roots = solve_momentum_on_energy(s.theta, s.p_theta, s.phi, sec.energy, p);
      if (roots.empty()) {
        results[i].status = SectionStatus::infeasible;
        results[i].message = "no p_phi puts this seed on the energy level";
        seeds.push_back(Json{{"seed", i}, {"status", "infeasible"}});
        continue;
      }
      s.p_phi = roots.back();
      completed = true;
    }
    seeds.push_back(Json{{"seed", i}, {"state", io::state_to_json(s)}, {"p_phi_completed", completed}});
    feasible.push_back(s);
    feasible_index.push_back(i);
  }
  const auto computed = poincare_section(feasible, p, sec, config.integrator, std::max(1u, threads));
  for (std::size_t k = 0; k < computed.size(); ++k) results[feasible_index[k]] = computed[k];

  Json per_seed = Json::array();
  bool failed = false;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const SectionResult& r = results[i];
    Json j = seeds[i];
    j["status"] = to_string(r.status);
    if (!r.message.empty()) j["message"] = r.message;
    j["points"] = r.points.size();
    double worst = 0.0;
    for (const SectionPoint& pt : r.points) worst = std::max(worst, pt.energy_residual);
    j["max_energy_residual"] = worst;
    if (p.A == 0.0 && r.points.size() >= 2) j["curve_fit_residual"] = integrable_curve_thickness(r.points, sec.energy, p);
    per_seed.push_back(j);
    if (r.status == SectionStatus::failed) {
      if (!failed) o.message = "seed " + std::to_string(i) + ": " + r.message;
      failed = true;
    }
    if (config.output.csv()) {
      io::CsvTable t = io::section_csv({r});
      for (auto& row : t.rows) row[0] = std::to_string(i);
      t.footer = {"seed " + std::to_string(i) + " status=" + to_string(r.status)};
      write_output(config, "section_seed" + std::to_string(i) + ".csv", io::write_csv(t), o);
    }
  }
  o.report = config_echo(config);
  o.report["integrator"] = integrator_json(config.integrator);
  o.report["section"] = Json{{"phi_star", sec.phi_star}, {"energy", sec.energy}, {"tolerance", sec.tolerance},
                             {"energy_tolerance", sec.energy_tolerance}};
  o.report["seeds"] = per_seed;
  if (config.output.json()) {
    Json full = o.report;
    full["points"] = io::section_json(results);
    write_output(config, "section.json", full.dump(2) + "\n", o);
  }
  if (failed) o.exit_code = kExitRuntimeError;
  return o;
}

// ---- curvature -------------------------------------------------------------

CommandOutcome cmd_curvature(const RunConfig& config) {
  CommandOutcome o;
  const Params& p = config.params;
  const double h = config.h.value_or(default_maupertuis_energy(p));
  std::vector<std::pair<std::string, MetricProfile>> metrics;
  for (MetricKind k : config.metrics) {
    switch (k) {
      case MetricKind::round: metrics.emplace_back("kappa_round", round_metric()); break;
      case MetricKind::new_system: metrics.emplace_back("kappa_new", new_system_metric(p)); break;
      case MetricKind::goryachev_chaplygin: metrics.emplace_back("kappa_gc", gc_metric()); break;
      case MetricKind::geodesic_maupertuis: {
        if (!(h > max_potential(p))) throw DomainError("curvature: h must exceed max V");
        metrics.emplace_back("kappa_maupertuis", maupertuis_metric(p, h));
        break;
      }
      case MetricKind::gc_geodesic:
        metrics.emplace_back("kappa_gc_geodesic", gc_geodesic_metric(config.gc.A1, config.gc.h1));
        break;
    }
  }
  const auto thetas = interior_theta_grid(config.grids.curvature_points);
  io::CsvTable t;
  t.header = {"theta", "z"};
  for (const auto& [name, m] : metrics) t.header.push_back(name);
  for (const char* c : {"R", "C_form", "min_eigenvalue"}) t.header.emplace_back(c);
  Json spreads = Json::object();
  std::vector<double> lo(metrics.size(), INFINITY), hi(metrics.size(), -INFINITY);
  for (double theta : thetas) {
    const double z = std::cos(theta);
    std::vector<double> row{theta, z};
    for (std::size_t k = 0; k < metrics.size(); ++k) {
      const double kappa = curvature(metrics[k].second, theta, 0.0);
      lo[k] = std::min(lo[k], kappa);
      hi[k] = std::max(hi[k], kappa);
      row.push_back(kappa);
    }
    const double w = structure::height_offset(z, p.s);
    row.push_back(structure::positivity_numerator(z, p.s));
    row.push_back(structure::azimuthal_coefficient(z, p.s) * (1.0 - z * z) * w * w);
    row.push_back(kinetic_quadratic_form(theta, p).min_eigenvalue());
    t.add_row(row);
  }
  for (std::size_t k = 0; k < metrics.size(); ++k) spreads[metrics[k].first] = hi[k] - lo[k];
  t.footer.push_back("phi=0 s=" + io::format_double(p.s) + " h=" + io::format_double(h));

  o.report = config_echo(config);
  o.report["h"] = h;
  o.report["kappa_spread"] = spreads;
  o.report["positivity"] = io::positivity_json(positivity_check(p.s, config.grids.positivity_points));
  o.report["comparison"] = io::curvature_comparison_summary_json(curvature_comparison(p, thetas));
  if (config.output.csv()) write_output(config, "curvature.csv", io::write_csv(t), o);
  if (config.output.json()) write_output(config, "curvature.json", o.report.dump(2) + "\n", o);
  return o;
}

// ---- geodesic --------------------------------------------------------------

CommandOutcome cmd_geodesic(const RunConfig& config) {
  CommandOutcome o;
  const Params& p = config.params;
  const double h = config.h.value_or(default_maupertuis_energy(p));
  const MaupertuisSystem sys = maupertuis_system(p, h, config.grids.sign_states, config.seed);
  const SphericalState start = state_on_energy(config.geodesic.theta, config.geodesic.phi, config.geodesic.p_theta, h, p);
  const GeodesicReport rep = geodesic_correspondence_check(sys, start, config.integrator);
  const bool ok = rep.max_geodesic_residual <= 1e-6 && rep.max_relative_F_drift <= 1e-6;
  o.report = config_echo(config);
  o.report["integrator"] = integrator_json(config.integrator);
  o.report["system"] = io::maupertuis_json(sys);
  o.report["initial"] = io::state_to_json(start);
  o.report["check"] = io::geodesic_report_json(rep);
  o.report["tolerances"] = Json{{"geodesic_residual", 1e-6}, {"relative_F_drift", 1e-6}};
  o.report["passed"] = ok;
  try {
    o.report["gc_geodesic"] = io::gc_geodesic_json(gc_geodesic_system(config.gc, config.grids.sign_states, config.seed));
  } catch (const std::exception& e) {
    o.report["gc_geodesic"] = Json{{"error", e.what()}};
  }
  if (!ok) {
    o.exit_code = kExitVerificationFailure;
    o.message = "geodesic check exceeded its tolerances";
  }
  if (config.output.json()) write_output(config, "geodesic.json", o.report.dump(2) + "\n", o);
  return o;
}

CommandOutcome run_command(const RunConfig& config, unsigned threads) {
  try {
    switch (config.command) {
      case Command::verify: return cmd_verify(config);
      case Command::simulate: return cmd_simulate(config);
      case Command::section: return cmd_section(config, threads);
      case Command::curvature: return cmd_curvature(config);
      case Command::geodesic: return cmd_geodesic(config);
    }
  } catch (const ConfigError& e) {
    return {kExitConfigError, Json{{"error", e.what()}}, {}, e.what()};
  } catch (const DomainError& e) {
    return {kExitConfigError, Json{{"error", e.what()}}, {}, e.what()};
  } catch (const std::exception& e) {
    return {kExitRuntimeError, Json{{"error", e.what()}}, {}, e.what()};
  }
  return {};
}

}  // namespace spheretop::cli

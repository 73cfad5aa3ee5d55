#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "spheretop/dynamics.hpp"
#include "test_support.hpp"

using namespace spheretop;
using spheretop::testing::global_distance;
using spheretop::testing::Sampler;

namespace {

const Params kDemo(1.0, 0.0, 2.0);
const SphericalState kGeneric{1.2, 0.3, 0.4, 0.6};

IntegratorConfig config(double dt, double t_end, std::size_t stride = 1) {
  IntegratorConfig c;
  c.dt = dt;
  c.t_end = t_end;
  c.stride = stride;
  return c;
}

GlobalState endpoint(const SphericalState& s, const Params& p, double dt, double t_end) {
  return integrate(CanonicalState{s}, p, config(dt, t_end, 1u << 30)).samples.back().state;
}

double canonical_distance(const CanonicalState& a, const CanonicalState& b) {
  return global_distance(to_global(a), to_global(b));
}

}  // namespace

TEST_CASE("integrator configuration is validated") {
  CHECK_NOTHROW(IntegratorConfig{}.validate());
  IntegratorConfig c;
  c.dt = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = IntegratorConfig{};
  c.tolerance = -1.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = IntegratorConfig{};
  c.switch_low = 0.95;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = IntegratorConfig{};
  c.switch_high = 1.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = IntegratorConfig{};
  c.stride = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = IntegratorConfig{};
  c.t_end = std::nan("");
  CHECK_THROWS_AS(c.validate(), ConfigError);
  CHECK(config(1e-3, 1.0).steps() == 1000);
  CHECK(config(1e-3, -1.0).steps() == 1000);
}

TEST_CASE("midpoint step with dt = 0 is the identity") {
  const CanonicalState s{kGeneric};
  const auto out = std::get<SphericalState>(step_implicit_midpoint(s, 0.0, kDemo));
  CHECK(out.theta == kGeneric.theta);
  CHECK(out.phi == kGeneric.phi);
  CHECK(out.p_theta == kGeneric.p_theta);
  CHECK(out.p_phi == kGeneric.p_phi);
}

TEST_CASE("midpoint step is time symmetric") {
  Sampler rng;
  double worst = 0.0;
  for (int k = 0; k < 200; ++k) {
    const Params p = rng.params();
    const SphericalState s = rng.spherical(0.9, 1.5);
    const CanonicalState start = k % 2 == 0 ? CanonicalState{s}
                                            : CanonicalState{spherical_to_pole(s, std::cos(s.theta) > 0
                                                                                      ? Hemisphere::north
                                                                                      : Hemisphere::south)};
    if (std::holds_alternative<PoleChartState>(start) && std::abs(std::cos(s.theta)) < 0.3) continue;
    const auto there = step_implicit_midpoint(start, 1e-3, p);
    const auto back = step_implicit_midpoint(there, -1e-3, p);
    const auto u = std::visit([](const auto& v) { return to_array(v); }, start);
    const auto w = std::visit([](const auto& v) { return to_array(v); }, back);
    for (int i = 0; i < 4; ++i) {
      double d = std::abs(u[i] - w[i]);
      if (i == 1 && std::holds_alternative<SphericalState>(start)) d = spheretop::testing::angle_distance(u[i], w[i]);
      worst = std::max(worst, d);
    }
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("midpoint solve failure is reported") {
  try {
    step_implicit_midpoint(CanonicalState{kGeneric}, 0.5, kDemo, 1e-14, 2);
    FAIL("expected ConvergenceError");
  } catch (const ConvergenceError& e) {
    CHECK(e.iterations() == 2);
    CHECK(e.residual() > 1e-14);
  }
  IntegratorConfig c = config(0.5, 5.0);
  c.max_iterations = 2;
  try {
    integrate(CanonicalState{kGeneric}, kDemo, c);
    FAIL("expected IntegrationError");
  } catch (const IntegrationError& e) {
    CHECK(e.step() == 1);
    CHECK(e.partial().samples.size() == 1);
    CHECK(e.residual() > 0.0);
  }
}

TEST_CASE("p_phi is conserved in the cyclic case") {
  const Params p(0.0, 0.0, 2.0);
  const SphericalState s{1.0, 0.2, 0.5, 0.8};
  const Trajectory tr = integrate(CanonicalState{s}, p, config(1e-3, 100.0, 1000));
  REQUIRE(tr.samples.size() == 101);
  double worst = 0.0;
  for (const Sample& x : tr.samples) worst = std::max(worst, std::abs(x.state.Lz - s.p_phi));
  CHECK(worst <= 1e-12);
}

TEST_CASE("equilibria give constant trajectories") {
  SUBCASE("rest state of the free system") {
    const Trajectory tr = integrate(CanonicalState{SphericalState{1.0, 0.5, 0.0, 0.0}}, Params(0.0, 0.0, 2.0),
                                    config(1e-2, 10.0));
    for (const Sample& x : tr.samples) CHECK(global_distance(x.state, tr.samples.front().state) == 0.0);
    CHECK(tr.drift.max_relative_H == 0.0);
    CHECK(tr.drift.max_relative_F == 0.0);
  }
  SUBCASE("maximum of the potential") {
    const SphericalState top{1.84206008052091741765924564824, 0.0, 0.0, 0.0};
    const Trajectory tr = integrate(CanonicalState{top}, kDemo, config(1e-2, 1.0));
    for (const Sample& x : tr.samples) CHECK(global_distance(x.state, tr.samples.front().state) <= 1e-13);
  }
}

TEST_CASE("trajectory bookkeeping") {
  const Trajectory tr = integrate(CanonicalState{kGeneric}, kDemo, config(1e-3, 10.0, 7));
  CHECK(tr.samples.size() == 1 + 10000 / 7 + 1);
  for (std::size_t i = 1; i < tr.samples.size(); ++i) CHECK(tr.samples[i].t > tr.samples[i - 1].t);
  CHECK(tr.samples.back().t == doctest::Approx(10.0).epsilon(1e-15));
  CHECK(tr.max_casimir_residual <= 1e-10);
  for (const Sample& x : tr.samples) {
    const auto [r, d] = casimir_residuals(x.state);
    CHECK(std::abs(r) <= 1e-10);
    CHECK(std::abs(d) <= 1e-10);
  }
  const Trajectory back = integrate(CanonicalState{kGeneric}, kDemo, config(1e-3, -1.0, 100));
  for (std::size_t i = 1; i < back.samples.size(); ++i) CHECK(back.samples[i].t < back.samples[i - 1].t);
}

TEST_CASE("chart switches are continuous and happen inside the band") {
  // Starts close to the north pole and crosses over it.
  const SphericalState s{0.6, 0.2, -1.5, 0.2};
  const Trajectory tr = integrate(CanonicalState{s}, kDemo, config(1e-3, 10.0));
  CHECK(tr.chart_switches >= 2);
  CHECK(tr.max_switch_discontinuity <= 1e-12);
  bool passed_pole = false;
  for (const Sample& x : tr.samples) passed_pole = passed_pole || std::abs(x.state.z) > 0.99;
  CHECK(passed_pole);

  const IntegratorConfig c = config(1e-3, 1.0);
  CHECK(std::holds_alternative<PoleChartState>(choose_chart(CanonicalState{SphericalState{0.3, 0.0, 0, 0}}, c)));
  CHECK(std::holds_alternative<SphericalState>(choose_chart(CanonicalState{SphericalState{0.5, 0.0, 0, 0}}, c)));
  CHECK(std::holds_alternative<PoleChartState>(choose_chart(GlobalState{0, 0, -1, 1, 0, 0}, c)));
}

TEST_CASE("chart switching is invisible against a global-chart control run") {
  const SphericalState s{0.6, 0.2, -1.5, 0.2};
  const Trajectory mid = integrate(CanonicalState{s}, kDemo, config(1e-5, 2.0, 1u << 30));
  const Trajectory rk4 = integrate_rk4_global(spherical_to_global(s), kDemo, config(1e-3, 2.0, 1u << 30));
  CHECK(mid.chart_switches >= 2);
  CHECK(global_distance(mid.samples.back().state, rk4.samples.back().state) <= 1e-8);
}

TEST_CASE("endpoint error converges at order 2") {
  const double t_end = 10.0;
  const GlobalState ref = endpoint(kGeneric, kDemo, 1e-3 / 16, t_end);
  const double e1 = global_distance(endpoint(kGeneric, kDemo, 1e-3, t_end), ref);
  const double e2 = global_distance(endpoint(kGeneric, kDemo, 5e-4, t_end), ref);
  CHECK(e1 / e2 >= 3.5);
  CHECK(e1 / e2 <= 4.5);
}

TEST_CASE("H and F drifts decrease at order 2") {
  std::vector<double> lh, lf, ld;
  for (double dt : {1e-2, 5e-3, 2.5e-3}) {
    const Trajectory tr = integrate(CanonicalState{kGeneric}, kDemo, config(dt, 10.0));
    lh.push_back(std::log(tr.drift.max_relative_H));
    lf.push_back(std::log(tr.drift.max_relative_F));
    ld.push_back(std::log(dt));
  }
  auto slope = [&](const std::vector<double>& y) {
    const double mx = (ld[0] + ld[1] + ld[2]) / 3, my = (y[0] + y[1] + y[2]) / 3;
    double sxy = 0, sxx = 0;
    for (int i = 0; i < 3; ++i) {
      sxy += (ld[i] - mx) * (y[i] - my);
      sxx += (ld[i] - mx) * (ld[i] - mx);
    }
    return sxy / sxx;
  };
  CHECK(slope(lh) >= 1.9);
  CHECK(slope(lh) <= 2.1);
  CHECK(slope(lf) >= 1.9);
  CHECK(slope(lf) <= 2.1);
}

TEST_CASE("drift report") {
  SUBCASE("constant trajectory") {
    std::vector<Sample> samples;
    for (int i = 0; i < 100; ++i) samples.push_back({0.1 * i, GlobalState{}, 2.5, -1.0});
    const DriftSummary d = drift_report(samples);
    CHECK(d.max_relative_H == 0.0);
    CHECK(d.max_relative_F == 0.0);
    CHECK(d.H_slope.slope == 0.0);
    CHECK_FALSE(d.H_slope.secular);
  }
  SUBCASE("linear drift is secular, relative to max(|X0|, 1)") {
    std::vector<Sample> samples;
    for (int i = 0; i < 100; ++i) samples.push_back({0.1 * i, GlobalState{}, 4.0 + 1e-3 * (0.1 * i), 0.5});
    const DriftSummary d = drift_report(samples);
    CHECK(d.max_relative_H == doctest::Approx(1e-3 * 9.9 / 4.0));
    CHECK(d.H_slope.slope == doctest::Approx(1e-3 / 4.0));
    CHECK(d.H_slope.secular);
  }
  SUBCASE("midpoint drift ratio under halving") {
    const double d1 = integrate(CanonicalState{kGeneric}, kDemo, config(1e-3, 20.0)).drift.max_relative_H;
    const double d2 = integrate(CanonicalState{kGeneric}, kDemo, config(5e-4, 20.0)).drift.max_relative_H;
    CHECK(d1 / d2 == doctest::Approx(4.0).epsilon(0.1));
  }
  SUBCASE("RK4 control run has a secular energy drift") {
    const Trajectory rk4 = integrate_rk4_global(spherical_to_global(kGeneric), kDemo, config(0.05, 2000.0, 10));
    CHECK(rk4.drift.H_slope.secular);
    CHECK(rk4.drift.H_slope.slope < 0.0);
  }
}

TEST_CASE("F drift of the demo run is bounded and non-secular") {
  const Trajectory tr = integrate(CanonicalState{kGeneric}, kDemo, config(1e-3, 100.0, 10));
  CHECK(tr.drift.max_relative_F <= 1e-5);
  CHECK_FALSE(tr.drift.F_slope.secular);
}

TEST_CASE("solve_momentum_on_energy") {
  SUBCASE("pure quadratic") {
    const double half_c = 0.5 * *eval_structure(0.0, 2.0).azimuthal_coefficient;
    const auto r = solve_momentum_on_energy(std::numbers::pi / 2, 0.0, 0.0, half_c, Params(0.0, 0.0, 2.0));
    REQUIRE(r.size() == 2);
    CHECK(r[0] == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK(r[1] == doctest::Approx(1.0).epsilon(1e-15));
  }
  SUBCASE("double root and infeasible energy") {
    const double e_min = hamiltonian(SphericalState{1.1, 0.4, 0.3, 0.0}, kDemo);
    const auto r = solve_momentum_on_energy(1.1, 0.3, 0.4, e_min, kDemo);
    REQUIRE(r.size() == 1);
    CHECK(r[0] == 0.0);
    CHECK(solve_momentum_on_energy(1.1, 0.3, 0.4, e_min - 1e-9, kDemo).empty());
  }
  SUBCASE("back-substitution") {
    Sampler rng;
    for (int k = 0; k < 1000; ++k) {
      const Params p = rng.params();
      const SphericalState s = rng.spherical();
      const double e = hamiltonian(SphericalState{s.theta, s.phi, s.p_theta, 0.0}, p) + rng.uniform(0.0, 3.0);
      for (double root : solve_momentum_on_energy(s.theta, s.p_theta, s.phi, e, p)) {
        CHECK(std::abs(hamiltonian(SphericalState{s.theta, s.phi, s.p_theta, root}, p) - e) <= 1e-12);
      }
    }
  }
  CHECK_THROWS_AS(solve_momentum_on_energy(0.0, 0.0, 0.0, 1.0, kDemo), DomainError);
}

namespace {

SphericalState seed_on_level(double theta, double p_theta, double E, const Params& p) {
  const auto roots = solve_momentum_on_energy(theta, p_theta, 0.0, E, p);
  REQUIRE(roots.size() == 2);
  return {theta, 0.0, p_theta, roots[1]};
}

}  // namespace

TEST_CASE("Poincare section in the integrable limit lies on a curve") {
  const Params p(0.0, 0.7, 2.0);
  SectionConfig sec;
  sec.energy = 1.5;
  const auto seeds = std::vector<SphericalState>{seed_on_level(1.3, 0.2, sec.energy, p),
                                                 seed_on_level(2.0, -0.5, sec.energy, p)};
  const auto results = poincare_section(seeds, p, sec, config(5e-5, 40.0), 2);
  REQUIRE(results.size() == 2);
  for (const SectionResult& r : results) {
    CHECK(r.status == SectionStatus::ok);
    REQUIRE(r.points.size() >= 5);
    CHECK(integrable_curve_thickness(r.points, sec.energy, p) <= 1e-6);
    for (const SectionPoint& pt : r.points) CHECK(pt.energy_residual <= 1e-8);
  }
  CHECK_THROWS_AS(integrable_curve_thickness(results[0].points, sec.energy, kDemo), DomainError);
}

TEST_CASE("Poincare section of the full system") {
  SectionConfig sec;
  sec.energy = 2.0;
  const SphericalState seed = seed_on_level(1.2, 0.3, sec.energy, kDemo);
  const auto results = poincare_section({seed}, kDemo, sec, config(5e-5, 40.0));
  REQUIRE(results.size() == 1);
  const SectionResult& r = results[0];
  CHECK(r.status == SectionStatus::ok);
  REQUIRE(r.points.size() >= 5);
  for (std::size_t i = 0; i < r.points.size(); ++i) {
    const SectionPoint& pt = r.points[i];
    CHECK(pt.index == i);
    CHECK(pt.energy_residual <= 1e-8);
    CHECK(solve_momentum_on_energy(pt.theta, pt.p_theta, 0.0, sec.energy, kDemo).size() == 2);
  }
  for (std::size_t i = 1; i < r.points.size(); ++i) CHECK(r.points[i].t > r.points[i - 1].t);
}

TEST_CASE("Poincare section reversing symmetry") {
  // (theta, phi, p_theta, p_phi) -> (theta, -phi, -p_theta, p_phi) reverses time and fixes phi = 0,
  // so the forward crossings of the image seed are the backward crossings of the seed with p_theta negated.
  SectionConfig sec;
  sec.energy = 2.0;
  sec.energy_tolerance = 1e-4;
  const SphericalState seed = seed_on_level(1.2, 0.3, sec.energy, kDemo);
  const SphericalState image{seed.theta, 0.0, -seed.p_theta, seed.p_phi};
  const auto fwd = poincare_section({image}, kDemo, sec, config(1e-3, 50.0));
  const auto bwd = poincare_section({seed}, kDemo, sec, config(1e-3, -50.0));
  REQUIRE(fwd[0].points.size() >= 3);
  REQUIRE(fwd[0].points.size() == bwd[0].points.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < fwd[0].points.size(); ++i) {
    worst = std::max(worst, std::abs(fwd[0].points[i].theta - bwd[0].points[i].theta));
    worst = std::max(worst, std::abs(fwd[0].points[i].p_theta + bwd[0].points[i].p_theta));
    CHECK(fwd[0].points[i].t == doctest::Approx(-bwd[0].points[i].t).epsilon(1e-9));
  }
  CHECK(worst <= 1e-9);
}

TEST_CASE("Poincare section edge cases") {
  SectionConfig sec;
  sec.energy = 1.0;
  CHECK(poincare_section({}, kDemo, sec, config(1e-3, 1.0)).empty());
  const auto off = poincare_section({SphericalState{1.2, 0.0, 0.3, 5.0}}, kDemo, sec, config(1e-3, 1.0));
  CHECK(off[0].status == SectionStatus::infeasible);
  CHECK(off[0].points.empty());
  const auto pole = poincare_section({SphericalState{0.0, 0.0, 0.3, 5.0}}, kDemo, sec, config(1e-3, 1.0));
  CHECK(pole[0].status == SectionStatus::infeasible);
  const SphericalState seed = seed_on_level(1.2, 0.3, sec.energy, kDemo);
  const auto short_run = poincare_section({seed}, kDemo, sec, config(1e-3, 1e-2));
  CHECK(short_run[0].status == SectionStatus::no_crossing);
  CHECK(to_string(SectionStatus::no_crossing) == "no_crossing");
  // at a coarse step the energy postcondition cannot hold and the run stops
  const auto coarse = poincare_section({seed}, kDemo, sec, config(2e-2, 50.0));
  CHECK(coarse[0].status == SectionStatus::failed);
  for (const SectionPoint& pt : coarse[0].points) CHECK(pt.energy_residual <= 1e-8);
}

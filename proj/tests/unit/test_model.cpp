#include <cmath>
#include <limits>
#include <numbers>

#include "doctest.h"
#include "spheretop/exact_identities.hpp"
#include "spheretop/model.hpp"
#include "test_support.hpp"

using namespace spheretop;
using spheretop::testing::Sampler;

TEST_CASE("Params enforce s > 1 and finiteness") {
  CHECK_NOTHROW(Params(1.0, 0.0, 1.0001));
  CHECK_THROWS_AS(Params(1.0, 0.0, 1.0), DomainError);
  CHECK_THROWS_AS(Params(1.0, 0.0, 0.5), DomainError);
  CHECK_THROWS_AS(Params(std::numeric_limits<double>::quiet_NaN(), 0.0, 2.0), DomainError);
  CHECK_THROWS_AS(Params(1.0, std::numeric_limits<double>::infinity(), 2.0), DomainError);
}

TEST_CASE("eval_structure at z = 0, s = 2") {
  const auto v = eval_structure(0.0, 2.0);
  CHECK(v.height_offset == 2.0);
  CHECK(v.correction_numerator == 1.0);
  CHECK(v.integral_numerator == -1.0);
  CHECK(v.inertia_correction == 1.0 / 16.0);
  REQUIRE(v.azimuthal_coefficient.has_value());
  CHECK(*v.azimuthal_coefficient == doctest::Approx(1.0 + 1.0 / 16.0).epsilon(1e-15));
}

TEST_CASE("R(-1) = (s - 1)^2 and C is undefined at the poles") {
  for (double s : {1.0001, 1.5, 2.0, 3.7, 10.0}) {
    const auto v = eval_structure(-1.0, s);
    CHECK(std::abs(v.positivity_numerator - (s - 1.0) * (s - 1.0)) <= 1e-12 * (1.0 + s * s));
    CHECK_FALSE(v.azimuthal_coefficient.has_value());
    CHECK_FALSE(eval_structure(1.0, s).azimuthal_coefficient.has_value());
  }
}

TEST_CASE("eval_structure domain errors") {
  CHECK_THROWS_AS(eval_structure(1.0000001, 2.0), DomainError);
  CHECK_THROWS_AS(eval_structure(-1.5, 2.0), DomainError);
  CHECK_THROWS_AS(eval_structure(0.0, 1.0), DomainError);
  CHECK_THROWS_AS(eval_structure(0.0, std::numeric_limits<double>::quiet_NaN()), DomainError);
}

TEST_CASE("Q and P identities hold to roundoff") {
  auto [rq, rp] = check_identities(1.0, 3.0);
  CHECK(rq == 0.0);
  CHECK(rp == 0.0);
  std::tie(rq, rp) = check_identities(-0.5, 1.5);
  CHECK(rq == 0.0);
  CHECK(rp == 0.0);

  const auto v = eval_structure(0.37, 1.9);
  const double w = v.height_offset;
  CHECK(std::abs(v.integral_numerator - (2.0 * 0.37 * w + 0.37 * 0.37 - 1.0)) <=
        4.0 * std::numeric_limits<double>::epsilon() * std::abs(v.integral_numerator));

  Sampler rng;
  double worst = 0.0;
  double worst_scaled = 0.0;
  for (int k = 0; k < 10000; ++k) {
    const double z = rng.uniform(-1.0, 1.0);
    const double s = rng.uniform(1.0 + 1e-12, 5.0);
    const auto [q, p] = check_identities(z, s);
    worst = std::max({worst, std::abs(q), std::abs(p)});
    const auto sv = eval_structure(z, s);
    const double scale = std::max({std::abs(sv.integral_numerator), std::abs(sv.correction_numerator), 1.0});
    worst_scaled = std::max(worst_scaled, std::max(std::abs(q), std::abs(p)) / scale);
  }
  CHECK(worst <= 1e-14);
  CHECK(worst_scaled <= 4.0 * std::numeric_limits<double>::epsilon());
}

TEST_CASE("exact integer check of the structure identities") {
  for (const auto& check : exact::check_structure_identities()) {
    INFO(check.name << " residual " << check.residual);
    CHECK(check.holds);
  }
}

TEST_CASE("exact polynomials detect a wrong identity") {
  using exact::Polynomial;
  const Polynomial z = Polynomial::z();
  const Polynomial s = Polynomial::s();
  const Polynomial wrong = (z + s) * (z + s) - (z * z + s * s);
  CHECK_FALSE(wrong.is_zero());
  CHECK(wrong.to_string() == "2*z^1*s^1");
  CHECK(((z + s) * (z - s) - (z * z - s * s)).is_zero());
}

TEST_CASE("structure_derivative matches the closed form and finite differences") {
  CHECK(structure_derivative(1.0, 2.5) == 0.0);
  CHECK(structure_derivative(-1.0, 2.5) == 0.0);
  CHECK(structure_derivative(0.0, 2.0) == 6.0);

  auto r = [](double z) { return structure::positivity_numerator(z, 1.2); };
  const double fd = spheretop::testing::central_difference(r, 0.3, 1e-6);
  CHECK(std::abs(fd - structure_derivative(0.3, 1.2)) <= 1e-8);

  // second-order convergence of the central difference confirms the closed form
  const double e1 = std::abs(spheretop::testing::central_difference(r, 0.3, 1e-2) - structure_derivative(0.3, 1.2));
  const double e2 = std::abs(spheretop::testing::central_difference(r, 0.3, 5e-3) - structure_derivative(0.3, 1.2));
  CHECK(std::log2(e1 / e2) == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("positivity numerator is consistent with C and positive inside (-1, 1)") {
  Sampler rng;
  for (int k = 0; k < 10000; ++k) {
    const double z = rng.uniform(-0.999, 0.999);
    const double s = rng.uniform(1.0 + 1e-9, 10.0);
    const double c = structure::azimuthal_coefficient(z, s);
    const double r = structure::positivity_numerator(z, s);
    CHECK(r > 0.0);
    CHECK(std::abs(c * (1.0 - z * z) * (z + s) * (z + s) - r) <= 1e-12 * std::max(1.0, r));
    CHECK(structure::height_offset(z, s) >= s - 1.0);
  }
}

TEST_CASE("potential in spherical and global forms") {
  const Params no_trig(0.0, 1.3, 2.0);
  CHECK(potential(0.7, 1.1, no_trig) == doctest::Approx(1.3 / (std::cos(0.7) + 2.0)).epsilon(1e-15));

  const Params p(1.0, 1.0, 2.0);
  CHECK(potential(0.0, 0.0, 1.0, p) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));

  // 30-digit reference: 1/sqrt(2)
  const Params q(1.0, 0.0, 2.0);
  const double expected = 0.707106781186547524400844362105;
  CHECK(std::abs(potential(std::numbers::pi / 2, 0.0, q) - expected) <= 1e-15);
  CHECK(std::abs(potential(-1.0, 0.0, 0.0, q) - expected) <= 1e-15);

  CHECK_THROWS_AS(potential(0.0, 0.3, q), DomainError);
  CHECK_THROWS_AS(potential(std::numbers::pi, 0.3, q), DomainError);
}

TEST_CASE("spherical and global potentials agree under the embedding convention") {
  Sampler rng;
  for (int k = 0; k < 1000; ++k) {
    const Params p = rng.params();
    const double theta = std::acos(rng.uniform(-0.99, 0.99));
    const double phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double x = -std::sin(theta) * std::cos(phi);
    const double y = -std::sin(theta) * std::sin(phi);
    CHECK(std::abs(potential(theta, phi, p) - potential(x, y, std::cos(theta), p)) <= 1e-12);
  }
}

TEST_CASE("linear potential profile U") {
  CHECK(linear_potential_profile(1.0, Params(1.0, 0.0, 3.0)) == -0.5);
  CHECK(linear_potential_profile(0.3, Params(0.0, 0.0, 3.0)) == 0.0);
  CHECK_THROWS_AS(linear_potential_profile(0.3, Params(1.0, 0.1, 3.0)), DomainError);

  Sampler rng;
  for (int k = 0; k < 100; ++k) {
    const Params p(rng.uniform(-2, 2), 0.0, rng.uniform(1.01, 5.0));
    const GlobalState g = rng.global();
    CHECK(std::abs(g.x * linear_potential_profile(g.z, p) - potential(g.x, g.y, g.z, p)) <= 1e-14);
  }
}

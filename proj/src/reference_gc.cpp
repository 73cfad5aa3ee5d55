#include "spheretop/reference_gc.hpp"

#include <algorithm>
#include <stdexcept>

#include "spheretop/bracket.hpp"

namespace spheretop {

GCParams::GCParams(double A1_, double h1_) : A1(A1_), h1(h1_) {
  if (!std::isfinite(A1) || !std::isfinite(h1)) throw DomainError("GCParams: A1 and h1 must be finite");
}

double gc_hamiltonian(const SphericalState& s, const GCParams& g) {
  validate(s);
  return gc::hamiltonian(to_array(s), g.A1);
}

double gc_integral(const SphericalState& s, const GCParams& g) {
  validate(s);
  return gc::integral(to_array(s), g.A1);
}

namespace {

SignResolution resolve_gc(double A1, double h1, std::size_t states, std::uint64_t seed) {
  const GCGeodesicHamiltonian hg{A1, h1};
  return resolve_sign_variants(
      [&](const SignVariant& v, const SphericalState& s) {
        return canonical_bracket_scaled(hg, GCGeodesicIntegral{A1, h1, v}, to_array(s));
      },
      states, seed);
}

}  // namespace

GCGeodesicSystem gc_geodesic_system(const GCParams& g, std::size_t states, std::uint64_t seed) {
  if (!(g.h1 > std::abs(g.A1))) throw DomainError("gc_geodesic_system: h1 must exceed |A1| = max V1");
  GCGeodesicSystem out;
  out.gc = g;
  out.resolution = resolve_gc(g.A1, g.h1, states, seed);
  if (out.resolution.selected) {
    out.variant = *out.resolution.selected;
    return out;
  }
  if (out.resolution.commuting > 1) {
    const SignResolution generic = resolve_gc(1.0, 2.0, states, seed);
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
  throw std::runtime_error("gc_geodesic_system: sign resolution found " + std::to_string(out.resolution.commuting) +
                           " commuting variants");
}

double gc_azimuthal_coefficient(double theta) {
  const double sn = std::sin(theta);
  return 1.0 / (sn * sn) + 3.0;
}

namespace {

double spread(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return *hi - *lo;
}

}  // namespace

CurvatureComparison curvature_comparison(const Params& p, const std::vector<double>& thetas) {
  CurvatureComparison out;
  out.thetas = thetas;
  out.kappa_new = curvature_profile(new_system_metric(p), thetas);
  out.kappa_gc = curvature_profile(gc_metric(), thetas);
  std::vector<double> correction, difference;
  double ratio_max = 0.0;
  for (double t : thetas) {
    const double c = *eval_structure(std::cos(t), p.s).azimuthal_coefficient;
    const double cg = gc_azimuthal_coefficient(t);
    out.c_new.push_back(c);
    out.c_gc.push_back(cg);
    const double sn = std::sin(t);
    correction.push_back(c - 1.0 / (sn * sn));
    difference.push_back(c - cg);
    ratio_max = std::max(ratio_max, c / cg);
  }
  out.kappa_new_spread = spread(out.kappa_new);
  out.kappa_gc_spread = spread(out.kappa_gc);
  out.c_new_spread = spread(out.c_new);
  out.correction_spread = spread(correction);
  out.difference_spread = spread(difference);

  // max_i |C_i - alpha C_GC,i| is convex in alpha; golden-section search on [0, 2 max ratio].
  auto cost = [&](double alpha) {
    double m = 0.0;
    for (std::size_t i = 0; i < out.c_new.size(); ++i) m = std::max(m, std::abs(out.c_new[i] - alpha * out.c_gc[i]));
    return m;
  };
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = 0.0, b = 2.0 * ratio_max;
  double x1 = b - invphi * (b - a), x2 = a + invphi * (b - a);
  double f1 = cost(x1), f2 = cost(x2);
  for (int it = 0; it < 200 && b - a > 1e-14 * std::max(1.0, b); ++it) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - invphi * (b - a);
      f1 = cost(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + invphi * (b - a);
      f2 = cost(x2);
    }
  }
  out.best_alpha = 0.5 * (a + b);
  out.proportionality_margin = cost(out.best_alpha);
  return out;
}

}  // namespace spheretop

#pragma once

// Integer-coefficient polynomials in (z, s), used to confirm the structure
// identities with no rounding at all. Rational coefficients are cleared by a
// common denominator before they get here.

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace spheretop::exact {

/// Polynomial sum of c_ij z^i s^j with int64 coefficients.
class Polynomial {
 public:
  Polynomial() = default;
  static Polynomial constant(long long c);
  static Polynomial z();
  static Polynomial s();
  static Polynomial monomial(long long c, int z_degree, int s_degree);

  Polynomial& operator+=(const Polynomial& o);
  Polynomial& operator-=(const Polynomial& o);
  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator*(long long k, const Polynomial& a);

  /// Formal derivative in z.
  Polynomial derivative_z() const;
  /// Substitute a fixed integer for z.
  Polynomial at_z(long long value) const;

  bool is_zero() const { return terms_.empty(); }
  bool operator==(const Polynomial& o) const { return terms_ == o.terms_; }
  std::string to_string() const;

 private:
  void prune();
  std::map<std::pair<int, int>, long long> terms_;
};

struct IdentityCheck {
  std::string name;
  bool holds = false;
  std::string residual;  ///< printed residual polynomial, "0" when it holds
};

/// The fixed identity battery: Q and P rewrites, C-from-R consistency,
/// R' = 3(1-z^2)(z+s), and R(-1) = (s-1)^2.
std::vector<IdentityCheck> check_structure_identities();

}  // namespace spheretop::exact

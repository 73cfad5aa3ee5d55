#include "spheretop/exact_identities.hpp"

#include <sstream>

namespace spheretop::exact {

Polynomial Polynomial::constant(long long c) { return monomial(c, 0, 0); }
Polynomial Polynomial::z() { return monomial(1, 1, 0); }
Polynomial Polynomial::s() { return monomial(1, 0, 1); }

Polynomial Polynomial::monomial(long long c, int z_degree, int s_degree) {
  Polynomial p;
  if (c != 0) p.terms_[{z_degree, s_degree}] = c;
  return p;
}

void Polynomial::prune() {
  for (auto it = terms_.begin(); it != terms_.end();) {
    it = it->second == 0 ? terms_.erase(it) : std::next(it);
  }
}

Polynomial& Polynomial::operator+=(const Polynomial& o) {
  for (const auto& [k, c] : o.terms_) terms_[k] += c;
  prune();
  return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& o) {
  for (const auto& [k, c] : o.terms_) terms_[k] -= c;
  prune();
  return *this;
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  Polynomial r;
  for (const auto& [ka, ca] : a.terms_) {
    for (const auto& [kb, cb] : b.terms_) {
      r.terms_[{ka.first + kb.first, ka.second + kb.second}] += ca * cb;
    }
  }
  r.prune();
  return r;
}

Polynomial operator*(long long k, const Polynomial& a) { return Polynomial::constant(k) * a; }

Polynomial Polynomial::derivative_z() const {
  Polynomial r;
  for (const auto& [k, c] : terms_) {
    if (k.first > 0) r.terms_[{k.first - 1, k.second}] += c * k.first;
  }
  r.prune();
  return r;
}

Polynomial Polynomial::at_z(long long value) const {
  Polynomial r;
  for (const auto& [k, c] : terms_) {
    long long scale = 1;
    for (int i = 0; i < k.first; ++i) scale *= value;
    r.terms_[{0, k.second}] += c * scale;
  }
  r.prune();
  return r;
}

std::string Polynomial::to_string() const {
  if (terms_.empty()) return "0";
  std::ostringstream out;
  bool first = true;
  for (const auto& [k, c] : terms_) {
    if (!first) out << (c < 0 ? " - " : " + ");
    else if (c < 0) out << "-";
    first = false;
    out << (c < 0 ? -c : c);
    if (k.first > 0) out << "*z^" << k.first;
    if (k.second > 0) out << "*s^" << k.second;
  }
  return out.str();
}

std::vector<IdentityCheck> check_structure_identities() {
  const Polynomial z = Polynomial::z();
  const Polynomial s = Polynomial::s();
  const Polynomial one = Polynomial::constant(1);

  const Polynomial w = z + s;
  const Polynomial p = 3 * (z * z) + 4 * (s * z) + one;
  const Polynomial q = 3 * (z * z) + 2 * (s * z) - one;
  // 4 R(z) = 6z^2 + 12sz + 4s^2 - 3z^4 - 4sz^3 + 1
  const Polynomial four_r = Polynomial::monomial(6, 2, 0) + Polynomial::monomial(12, 1, 1) +
                            Polynomial::monomial(4, 0, 2) - Polynomial::monomial(3, 4, 0) -
                            Polynomial::monomial(4, 3, 1) + one;

  std::vector<IdentityCheck> out;
  auto record = [&out](std::string name, const Polynomial& residual) {
    out.push_back({std::move(name), residual.is_zero(), residual.to_string()});
  };

  record("Q = 2zW + z^2 - 1", q - (2 * (z * w) + z * z - one));
  record("P = 4zW + 1 - z^2", p - (4 * (z * w) + one - z * z));
  // 4 C (1 - z^2) W^2 = 4 W^2 + P (1 - z^2)
  record("C (1 - z^2) W^2 = R", 4 * (w * w) + p * (one - z * z) - four_r);
  record("R' = 3 (1 - z^2)(z + s)", four_r.derivative_z() - 12 * ((one - z * z) * w));
  record("R(-1) = (s - 1)^2", four_r.at_z(-1) - 4 * ((s - one) * (s - one)));
  return out;
}

}  // namespace spheretop::exact

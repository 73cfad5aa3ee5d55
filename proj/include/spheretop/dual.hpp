#pragma once

// Forward-mode automatic differentiation.
//
// Dual<N, T> carries a value and N first partials. T may itself be a Dual,
// which yields second (and higher) derivatives by nesting:
//
//   using Jet = Dual<2, Dual<2>>;   // value, gradient, Hessian in 2 variables
//
// All math functions are found by ADL, so generic code should call them
// unqualified after `using std::sin;` etc.

#include <array>
#include <cmath>
#include <cstddef>
#include <type_traits>

namespace spheretop {

template <std::size_t N, class T = double>
class Dual;

template <class T>
struct is_dual : std::false_type {};
template <std::size_t N, class T>
struct is_dual<Dual<N, T>> : std::true_type {};
template <class T>
inline constexpr bool is_dual_v = is_dual<T>::value;

template <class S>
concept Arithmetic = std::is_arithmetic_v<S>;

template <std::size_t N, class T>
class Dual {
 public:
  using value_type = T;
  static constexpr std::size_t size = N;

  T value{};
  std::array<T, N> partials{};

  constexpr Dual() = default;
  constexpr Dual(const T& v) : value(v) {}  // NOLINT(google-explicit-constructor)
  template <Arithmetic S>
    requires(!std::is_same_v<S, T>)
  constexpr Dual(S v) : value(static_cast<T>(v)) {}  // NOLINT(google-explicit-constructor)

  /// Independent variable number `index`.
  static constexpr Dual variable(const T& v, std::size_t index) {
    Dual d(v);
    d.partials[index] = T(1);
    return d;
  }

  constexpr Dual& operator+=(const Dual& o) {
    value += o.value;
    for (std::size_t i = 0; i < N; ++i) partials[i] += o.partials[i];
    return *this;
  }
  constexpr Dual& operator-=(const Dual& o) {
    value -= o.value;
    for (std::size_t i = 0; i < N; ++i) partials[i] -= o.partials[i];
    return *this;
  }
  constexpr Dual& operator*=(const Dual& o) {
    for (std::size_t i = 0; i < N; ++i) partials[i] = partials[i] * o.value + value * o.partials[i];
    value *= o.value;
    return *this;
  }
  constexpr Dual& operator/=(const Dual& o) {
    const T inv = T(1) / o.value;
    const T q = value * inv;
    for (std::size_t i = 0; i < N; ++i) partials[i] = (partials[i] - q * o.partials[i]) * inv;
    value = q;
    return *this;
  }

  constexpr Dual operator-() const {
    Dual r;
    r.value = -value;
    for (std::size_t i = 0; i < N; ++i) r.partials[i] = -partials[i];
    return r;
  }
  constexpr Dual operator+() const { return *this; }
};

// Chain rule helper: f(a) with f(a.value) = fv and f'(a.value) = dfv.
template <std::size_t N, class T>
constexpr Dual<N, T> chain(const Dual<N, T>& a, const T& fv, const T& dfv) {
  Dual<N, T> r(fv);
  for (std::size_t i = 0; i < N; ++i) r.partials[i] = dfv * a.partials[i];
  return r;
}

#define SPHERETOP_DUAL_BINARY(op, assign)                                              \
  template <std::size_t N, class T>                                                    \
  constexpr Dual<N, T> operator op(Dual<N, T> a, const Dual<N, T>& b) {               \
    return a assign b;                                                                 \
  }                                                                                    \
  template <std::size_t N, class T, class S>                                           \
    requires(Arithmetic<S> || std::is_same_v<S, T>)                                    \
  constexpr Dual<N, T> operator op(Dual<N, T> a, const S& b) {                        \
    return a assign Dual<N, T>(b);                                                     \
  }                                                                                    \
  template <std::size_t N, class T, class S>                                           \
    requires(Arithmetic<S> || std::is_same_v<S, T>)                                    \
  constexpr Dual<N, T> operator op(const S& a, const Dual<N, T>& b) {                 \
    return Dual<N, T>(a) assign b;                                                     \
  }

SPHERETOP_DUAL_BINARY(+, +=)
SPHERETOP_DUAL_BINARY(-, -=)
SPHERETOP_DUAL_BINARY(*, *=)
SPHERETOP_DUAL_BINARY(/, /=)
#undef SPHERETOP_DUAL_BINARY

// Comparisons look at the value only.
template <std::size_t N, class T>
constexpr bool operator<(const Dual<N, T>& a, const Dual<N, T>& b) { return a.value < b.value; }
template <std::size_t N, class T>
constexpr bool operator>(const Dual<N, T>& a, const Dual<N, T>& b) { return a.value > b.value; }
template <std::size_t N, class T, Arithmetic S>
constexpr bool operator<(const Dual<N, T>& a, S b) { return a.value < b; }
template <std::size_t N, class T, Arithmetic S>
constexpr bool operator>(const Dual<N, T>& a, S b) { return a.value > b; }

/// Innermost scalar value of a possibly nested dual.
template <class T>
constexpr double scalar_value(const T& x) {
  if constexpr (is_dual_v<T>) {
    return scalar_value(x.value);
  } else {
    return static_cast<double>(x);
  }
}

template <std::size_t N, class T>
Dual<N, T> sin(const Dual<N, T>& a) {
  using std::cos;
  using std::sin;
  return chain(a, T(sin(a.value)), T(cos(a.value)));
}

template <std::size_t N, class T>
Dual<N, T> cos(const Dual<N, T>& a) {
  using std::cos;
  using std::sin;
  return chain(a, T(cos(a.value)), T(-sin(a.value)));
}

template <std::size_t N, class T>
Dual<N, T> tan(const Dual<N, T>& a) {
  using std::cos;
  using std::tan;
  const T c = cos(a.value);
  return chain(a, T(tan(a.value)), T(T(1) / (c * c)));
}

template <std::size_t N, class T>
Dual<N, T> sqrt(const Dual<N, T>& a) {
  using std::sqrt;
  const T r = sqrt(a.value);
  return chain(a, r, T(T(0.5) / r));
}

template <std::size_t N, class T>
Dual<N, T> exp(const Dual<N, T>& a) {
  using std::exp;
  const T e = exp(a.value);
  return chain(a, e, e);
}

template <std::size_t N, class T>
Dual<N, T> log(const Dual<N, T>& a) {
  using std::log;
  return chain(a, T(log(a.value)), T(T(1) / a.value));
}

template <std::size_t N, class T>
Dual<N, T> pow(const Dual<N, T>& a, double exponent) {
  using std::pow;
  return chain(a, T(pow(a.value, exponent)), T(exponent * pow(a.value, exponent - 1.0)));
}

template <std::size_t N, class T>
Dual<N, T> acos(const Dual<N, T>& a) {
  using std::acos;
  using std::sqrt;
  return chain(a, T(acos(a.value)), T(T(-1) / sqrt(T(1) - a.value * a.value)));
}

template <std::size_t N, class T>
Dual<N, T> asin(const Dual<N, T>& a) {
  using std::asin;
  using std::sqrt;
  return chain(a, T(asin(a.value)), T(T(1) / sqrt(T(1) - a.value * a.value)));
}

template <std::size_t N, class T>
Dual<N, T> atan2(const Dual<N, T>& y, const Dual<N, T>& x) {
  using std::atan2;
  const T denom = x.value * x.value + y.value * y.value;
  Dual<N, T> r(T(atan2(y.value, x.value)));
  for (std::size_t i = 0; i < N; ++i) r.partials[i] = (x.value * y.partials[i] - y.value * x.partials[i]) / denom;
  return r;
}

template <std::size_t N, class T>
Dual<N, T> abs(const Dual<N, T>& a) {
  return scalar_value(a) < 0.0 ? -a : a;
}

template <class T>
constexpr T square(const T& x) {
  return x * x;
}

}  // namespace spheretop

#pragma once
// Forward-mode automatic differentiation.
//
// Dual<T, N> carries a value and N directional derivatives. Nesting
// Dual<Dual<double, N>, N> gives second derivatives, and so on.

#include <array>
#include <cmath>
#include <type_traits>

namespace efimov::ad {

template <class T, int N>
struct Dual {
  T v{};
  std::array<T, N> d{};

  constexpr Dual() = default;
  constexpr Dual(double c) : v(c) {}  // NOLINT(google-explicit-constructor)
  constexpr Dual(const T& value, const std::array<T, N>& grad) requires(!std::is_same_v<T, double>)
      : v(value), d(grad) {}
  constexpr Dual(double value, const std::array<double, N>& grad) requires(std::is_same_v<T, double>)
      : v(value), d(grad) {}

  Dual& operator+=(const Dual& o) {
    v += o.v;
    for (int i = 0; i < N; ++i) d[i] += o.d[i];
    return *this;
  }
  Dual& operator-=(const Dual& o) {
    v -= o.v;
    for (int i = 0; i < N; ++i) d[i] -= o.d[i];
    return *this;
  }
  Dual& operator*=(const Dual& o) {
    for (int i = 0; i < N; ++i) d[i] = d[i] * o.v + v * o.d[i];
    v *= o.v;
    return *this;
  }
  Dual& operator/=(const Dual& o) {
    *this = *this / o;
    return *this;
  }
  Dual& operator+=(double c) {
    v += c;
    return *this;
  }
  Dual& operator-=(double c) {
    v -= c;
    return *this;
  }
  Dual& operator*=(double c) {
    v *= c;
    for (auto& x : d) x *= c;
    return *this;
  }
  Dual& operator/=(double c) {
    v /= c;
    for (auto& x : d) x /= c;
    return *this;
  }

  friend Dual operator-(const Dual& a) {
    Dual r;
    r.v = -a.v;
    for (int i = 0; i < N; ++i) r.d[i] = -a.d[i];
    return r;
  }
  friend Dual operator+(Dual a, const Dual& b) { return a += b; }
  friend Dual operator-(Dual a, const Dual& b) { return a -= b; }
  friend Dual operator*(Dual a, const Dual& b) { return a *= b; }
  friend Dual operator/(const Dual& a, const Dual& b) {
    Dual r;
    T inv = T(1.0) / b.v;
    r.v = a.v * inv;
    for (int i = 0; i < N; ++i) r.d[i] = (a.d[i] - r.v * b.d[i]) * inv;
    return r;
  }
  friend Dual operator+(Dual a, double c) { return a += c; }
  friend Dual operator+(double c, Dual a) { return a += c; }
  friend Dual operator-(Dual a, double c) { return a -= c; }
  friend Dual operator-(double c, const Dual& a) { return -a + c; }
  friend Dual operator*(Dual a, double c) { return a *= c; }
  friend Dual operator*(double c, Dual a) { return a *= c; }
  friend Dual operator/(Dual a, double c) { return a /= c; }
  friend Dual operator/(double c, const Dual& a) { return Dual(c) / a; }
};

template <class T>
struct is_dual : std::false_type {};
template <class T, int N>
struct is_dual<Dual<T, N>> : std::true_type {};

// Innermost double value.
inline double value_of(double x) { return x; }
template <class T, int N>
double value_of(const Dual<T, N>& x) {
  return value_of(x.v);
}

template <class T, int N>
bool operator<(const Dual<T, N>& a, const Dual<T, N>& b) { return value_of(a) < value_of(b); }
template <class T, int N>
bool operator>(const Dual<T, N>& a, const Dual<T, N>& b) { return value_of(a) > value_of(b); }
template <class T, int N>
bool operator<(const Dual<T, N>& a, double b) { return value_of(a) < b; }
template <class T, int N>
bool operator>(const Dual<T, N>& a, double b) { return value_of(a) > b; }
template <class T, int N>
bool operator<(double a, const Dual<T, N>& b) { return a < value_of(b); }
template <class T, int N>
bool operator>(double a, const Dual<T, N>& b) { return a > value_of(b); }

namespace detail {
template <class T, int N>
Dual<T, N> chain(const Dual<T, N>& a, const T& f, const T& df) {
  Dual<T, N> r;
  r.v = f;
  for (int i = 0; i < N; ++i) r.d[i] = df * a.d[i];
  return r;
}
}  // namespace detail

template <class T, int N>
Dual<T, N> sqrt(const Dual<T, N>& a) {
  using std::sqrt;
  T s = sqrt(a.v);
  return detail::chain(a, s, T(0.5) / s);
}
template <class T, int N>
Dual<T, N> exp(const Dual<T, N>& a) {
  using std::exp;
  T e = exp(a.v);
  return detail::chain(a, e, e);
}
template <class T, int N>
Dual<T, N> log(const Dual<T, N>& a) {
  using std::log;
  return detail::chain(a, log(a.v), T(1.0) / a.v);
}
template <class T, int N>
Dual<T, N> sin(const Dual<T, N>& a) {
  using std::cos;
  using std::sin;
  return detail::chain(a, sin(a.v), cos(a.v));
}
template <class T, int N>
Dual<T, N> cos(const Dual<T, N>& a) {
  using std::cos;
  using std::sin;
  return detail::chain(a, cos(a.v), -sin(a.v));
}
template <class T, int N>
Dual<T, N> sinh(const Dual<T, N>& a) {
  using std::cosh;
  using std::sinh;
  return detail::chain(a, sinh(a.v), cosh(a.v));
}
template <class T, int N>
Dual<T, N> cosh(const Dual<T, N>& a) {
  using std::cosh;
  using std::sinh;
  return detail::chain(a, cosh(a.v), sinh(a.v));
}
template <class T, int N>
Dual<T, N> tanh(const Dual<T, N>& a) {
  using std::tanh;
  T t = tanh(a.v);
  return detail::chain(a, t, T(1.0) - t * t);
}
template <class T, int N>
Dual<T, N> atan(const Dual<T, N>& a) {
  using std::atan;
  return detail::chain(a, atan(a.v), T(1.0) / (T(1.0) + a.v * a.v));
}
template <class T, int N>
Dual<T, N> pow(const Dual<T, N>& a, double p) {
  using std::pow;
  return detail::chain(a, pow(a.v, p), p * pow(a.v, p - 1.0));
}
template <class T, int N>
Dual<T, N> abs(const Dual<T, N>& a) {
  return value_of(a) < 0.0 ? -a : a;
}

// Integer powers by repeated multiplication; exact for negative bases.
template <class T>
T ipow(const T& x, int n) {
  if (n < 0) return T(1.0) / ipow(x, -n);
  T r(1.0);
  T b = x;
  while (n > 0) {
    if (n & 1) r = r * b;
    b = b * b;
    n >>= 1;
  }
  return r;
}

// Seeds a variable along direction `index` at every nesting level, so that
// the nested dual computes all partial derivatives up to its depth.
template <class T>
T variable(double value, int index) {
  if constexpr (std::is_same_v<T, double>) {
    (void)index;
    return value;
  } else {
    using Inner = decltype(T{}.v);
    T r;
    r.v = variable<Inner>(value, index);
    for (int i = 0; i < static_cast<int>(r.d.size()); ++i) r.d[i] = Inner(i == index ? 1.0 : 0.0);
    return r;
  }
}

template <class T>
T constant(double value) {
  return T(value);
}

// Partial derivative of a nested dual along the listed directions
// (outermost first). Fewer indices than the nesting depth return lower order.
inline double partial(double x) { return x; }
template <class T, int N, class... I>
double partial(const Dual<T, N>& x, int i, I... rest) {
  return partial(x.d[i], rest...);
}
template <class T, int N>
double partial(const Dual<T, N>& x) {
  return partial(x.v);
}

}  // namespace efimov::ad

namespace efimov::math {
using std::abs;
using std::atan;
using std::cos;
using std::cosh;
using std::exp;
using std::log;
using std::pow;
using std::sin;
using std::sinh;
using std::sqrt;
using std::tanh;
using ad::abs;
using ad::atan;
using ad::cos;
using ad::cosh;
using ad::exp;
using ad::ipow;
using ad::log;
using ad::pow;
using ad::sin;
using ad::sinh;
using ad::sqrt;
using ad::tanh;
using ad::value_of;
}  // namespace efimov::math

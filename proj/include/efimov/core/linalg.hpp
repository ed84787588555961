#pragma once
// Small fixed-size vectors and matrices over an arbitrary scalar type.
// The scalar may be double or a (nested) dual number.

#include <array>
#include <cmath>
#include <cstddef>

#include "efimov/core/dual.hpp"

namespace efimov {

template <class T, int N>
struct Vec {
  static constexpr int size = N;
  template <class U>
  using rebind = Vec<U, N>;
  using scalar = T;

  std::array<T, N> c{};

  T& operator[](int i) { return c[static_cast<std::size_t>(i)]; }
  const T& operator[](int i) const { return c[static_cast<std::size_t>(i)]; }

  Vec& operator+=(const Vec& o) {
    for (int i = 0; i < N; ++i) c[i] += o.c[i];
    return *this;
  }
  Vec& operator-=(const Vec& o) {
    for (int i = 0; i < N; ++i) c[i] -= o.c[i];
    return *this;
  }
  template <class S>
  Vec& operator*=(const S& s) {
    for (auto& x : c) x *= s;
    return *this;
  }
  template <class S>
  Vec& operator/=(const S& s) {
    for (auto& x : c) x /= s;
    return *this;
  }
  friend Vec operator+(Vec a, const Vec& b) { return a += b; }
  friend Vec operator-(Vec a, const Vec& b) { return a -= b; }
  friend Vec operator-(Vec a) {
    for (auto& x : a.c) x = -x;
    return a;
  }
  friend Vec operator*(Vec a, const T& s) { return a *= s; }
  friend Vec operator*(const T& s, Vec a) { return a *= s; }
  friend Vec operator/(Vec a, const T& s) { return a /= s; }
  friend bool operator==(const Vec& a, const Vec& b) { return a.c == b.c; }
};

template <class T, int N>
Vec<T, N> operator*(Vec<T, N> a, double s) requires(!std::is_same_v<T, double>) {
  return a *= s;
}
template <class T, int N>
Vec<T, N> operator*(double s, Vec<T, N> a) requires(!std::is_same_v<T, double>) {
  return a *= s;
}

// Row-major R x C matrix.
template <class T, int R, int C = R>
struct Mat {
  static constexpr int rows = R;
  static constexpr int cols = C;
  static constexpr int size = R * C;
  template <class U>
  using rebind = Mat<U, R, C>;
  using scalar = T;

  std::array<T, R * C> c{};

  T& operator()(int i, int j) { return c[static_cast<std::size_t>(i * C + j)]; }
  const T& operator()(int i, int j) const { return c[static_cast<std::size_t>(i * C + j)]; }
  T& operator[](int k) { return c[static_cast<std::size_t>(k)]; }
  const T& operator[](int k) const { return c[static_cast<std::size_t>(k)]; }

  static Mat identity() {
    Mat m;
    for (int i = 0; i < R && i < C; ++i) m(i, i) = T(1.0);
    return m;
  }

  Mat& operator+=(const Mat& o) {
    for (int i = 0; i < R * C; ++i) c[i] += o.c[i];
    return *this;
  }
  Mat& operator-=(const Mat& o) {
    for (int i = 0; i < R * C; ++i) c[i] -= o.c[i];
    return *this;
  }
  template <class S>
  Mat& operator*=(const S& s) {
    for (auto& x : c) x *= s;
    return *this;
  }
  template <class S>
  Mat& operator/=(const S& s) {
    for (auto& x : c) x /= s;
    return *this;
  }
  friend Mat operator+(Mat a, const Mat& b) { return a += b; }
  friend Mat operator-(Mat a, const Mat& b) { return a -= b; }
  friend Mat operator-(Mat a) {
    for (auto& x : a.c) x = -x;
    return a;
  }
  friend Mat operator*(Mat a, const T& s) { return a *= s; }
  friend Mat operator*(const T& s, Mat a) { return a *= s; }
  friend Mat operator/(Mat a, const T& s) { return a /= s; }
};

template <class T, int R, int C>
Mat<T, R, C> operator*(Mat<T, R, C> a, double s) requires(!std::is_same_v<T, double>) {
  return a *= s;
}
template <class T, int R, int C>
Mat<T, R, C> operator*(double s, Mat<T, R, C> a) requires(!std::is_same_v<T, double>) {
  return a *= s;
}

using Vec2 = Vec<double, 2>;
using Vec3 = Vec<double, 3>;
using Mat2 = Mat<double, 2>;
using Mat3 = Mat<double, 3>;

template <class T, int R, int K, int C>
Mat<T, R, C> operator*(const Mat<T, R, K>& a, const Mat<T, K, C>& b) {
  Mat<T, R, C> m;
  for (int i = 0; i < R; ++i)
    for (int j = 0; j < C; ++j) {
      T s(0.0);
      for (int k = 0; k < K; ++k) s += a(i, k) * b(k, j);
      m(i, j) = s;
    }
  return m;
}

template <class T, int R, int C>
Vec<T, R> operator*(const Mat<T, R, C>& a, const Vec<T, C>& x) {
  Vec<T, R> y;
  for (int i = 0; i < R; ++i) {
    T s(0.0);
    for (int j = 0; j < C; ++j) s += a(i, j) * x[j];
    y[i] = s;
  }
  return y;
}

template <class T, int R, int C>
Mat<T, C, R> transpose(const Mat<T, R, C>& a) {
  Mat<T, C, R> t;
  for (int i = 0; i < R; ++i)
    for (int j = 0; j < C; ++j) t(j, i) = a(i, j);
  return t;
}

template <class T, int N>
T dot(const Vec<T, N>& a, const Vec<T, N>& b) {
  T s(0.0);
  for (int i = 0; i < N; ++i) s += a[i] * b[i];
  return s;
}

// x^T M y
template <class T, int N>
T form(const Mat<T, N>& m, const Vec<T, N>& x, const Vec<T, N>& y) {
  T s(0.0);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) s += x[i] * m(i, j) * y[j];
  return s;
}

template <class T>
Vec<T, 3> cross(const Vec<T, 3>& a, const Vec<T, 3>& b) {
  return Vec<T, 3>{{a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]}};
}

template <class T>
T det(const Mat<T, 2>& m) {
  return m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
}
template <class T>
T det(const Mat<T, 3>& m) {
  return m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) - m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0)) +
         m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
}
template <class T>
T trace(const Mat<T, 2>& m) {
  return m(0, 0) + m(1, 1);
}

// Inverses assume the caller has checked the determinant.
template <class T>
Mat<T, 2> inverse(const Mat<T, 2>& m) {
  T id = T(1.0) / det(m);
  Mat<T, 2> r;
  r(0, 0) = m(1, 1) * id;
  r(0, 1) = -m(0, 1) * id;
  r(1, 0) = -m(1, 0) * id;
  r(1, 1) = m(0, 0) * id;
  return r;
}
template <class T>
Mat<T, 3> inverse(const Mat<T, 3>& m) {
  Mat<T, 3> a;
  a(0, 0) = m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1);
  a(0, 1) = m(0, 2) * m(2, 1) - m(0, 1) * m(2, 2);
  a(0, 2) = m(0, 1) * m(1, 2) - m(0, 2) * m(1, 1);
  a(1, 0) = m(1, 2) * m(2, 0) - m(1, 0) * m(2, 2);
  a(1, 1) = m(0, 0) * m(2, 2) - m(0, 2) * m(2, 0);
  a(1, 2) = m(0, 2) * m(1, 0) - m(0, 0) * m(1, 2);
  a(2, 0) = m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0);
  a(2, 1) = m(0, 1) * m(2, 0) - m(0, 0) * m(2, 1);
  a(2, 2) = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  T id = T(1.0) / (m(0, 0) * a(0, 0) + m(0, 1) * a(1, 0) + m(0, 2) * a(2, 0));
  return a * id;
}

template <int N>
double norm(const Vec<double, N>& v) {
  return std::sqrt(dot(v, v));
}
template <int R, int C>
double max_abs(const Mat<double, R, C>& m) {
  double s = 0.0;
  for (double x : m.c) s = std::max(s, std::abs(x));
  return s;
}
template <int N>
double max_abs(const Vec<double, N>& v) {
  double s = 0.0;
  for (double x : v.c) s = std::max(s, std::abs(x));
  return s;
}

// Norm of a vector under a metric.
template <int N>
double metric_norm(const Mat<double, N>& g, const Vec<double, N>& x) {
  return std::sqrt(std::max(0.0, form(g, x, x)));
}

// Component-wise conversion between scalar types.
template <class U, class T, int N>
Vec<U, N> value_cast(const Vec<T, N>& v) {
  Vec<U, N> r;
  for (int i = 0; i < N; ++i) r[i] = static_cast<U>(v[i]);
  return r;
}

// Innermost value of each component.
template <class T, int N>
Vec<double, N> values(const Vec<T, N>& v) {
  Vec<double, N> r;
  for (int i = 0; i < N; ++i) r[i] = ad::value_of(v[i]);
  return r;
}
template <class T, int R, int C>
Mat<double, R, C> values(const Mat<T, R, C>& m) {
  Mat<double, R, C> r;
  for (int i = 0; i < R * C; ++i) r[i] = ad::value_of(m[i]);
  return r;
}

}  // namespace efimov

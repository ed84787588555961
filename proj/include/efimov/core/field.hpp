#pragma once
// Smooth fields on coordinate boxes, with derivative jets computed either
// by automatic differentiation of a templated functor or by central
// finite differences with Richardson extrapolation.

#include <array>
#include <functional>
#include <string>
#include <type_traits>
#include <utility>

#include "efimov/core/dual.hpp"
#include "efimov/core/error.hpp"
#include "efimov/core/linalg.hpp"

namespace efimov {

template <int Dim>
struct Box {
  Vec<double, Dim> lo;
  Vec<double, Dim> hi;

  bool contains(const Vec<double, Dim>& p, double margin = 0.0) const {
    for (int i = 0; i < Dim; ++i)
      if (!(p[i] >= lo[i] + margin && p[i] <= hi[i] - margin)) return false;
    return true;
  }
  Vec<double, Dim> center() const { return (lo + hi) * 0.5; }
};
using Box2 = Box<2>;
using Box3 = Box<3>;

template <int Dim>
std::string format_point(const Vec<double, Dim>& p) {
  std::string s = "(";
  for (int i = 0; i < Dim; ++i) {
    if (i) s += ", ";
    s += std::to_string(p[i]);
  }
  return s + ")";
}

// Value and partial derivatives up to `order` (at most 3).
template <class V, int Dim>
struct Jet {
  V value{};
  std::array<V, Dim> d{};
  std::array<std::array<V, Dim>, Dim> dd{};
  std::array<std::array<std::array<V, Dim>, Dim>, Dim> ddd{};
  int order = 0;
};

enum class DerivativeMode { Analytic, FiniteDifference };

namespace detail {

template <int Depth, int Dim>
struct nested {
  using type = ad::Dual<typename nested<Depth - 1, Dim>::type, Dim>;
};
template <int Dim>
struct nested<0, Dim> {
  using type = double;
};
template <int Depth, int Dim>
using nested_t = typename nested<Depth, Dim>::type;

template <class V>
constexpr int component_count() {
  if constexpr (std::is_arithmetic_v<V>)
    return 1;
  else
    return V::size;
}
template <class V>
decltype(auto) component(V& v, int k) {
  using B = std::remove_const_t<V>;
  if constexpr (std::is_arithmetic_v<B> || ad::is_dual<B>::value) {
    (void)k;
    return (v);
  } else {
    return (v[k]);
  }
}
template <class V, class T>
struct rebind {
  using type = typename V::template rebind<T>;
};
template <class T>
struct rebind<double, T> {
  using type = T;
};

template <class V, int Dim, int Depth, class F>
Jet<V, Dim> ad_jet(const F& f, const Vec<double, Dim>& p) {
  using T = nested_t<Depth, Dim>;
  Vec<T, Dim> x;
  for (int i = 0; i < Dim; ++i) x[i] = ad::variable<T>(p[i], i);
  typename rebind<V, T>::type y = f(x);
  Jet<V, Dim> j;
  j.order = Depth;
  for (int k = 0; k < component_count<V>(); ++k) {
    const T& yk = component(y, k);
    component(j.value, k) = ad::partial(yk);
    if constexpr (Depth >= 1)
      for (int a = 0; a < Dim; ++a) component(j.d[a], k) = ad::partial(yk, a);
    if constexpr (Depth >= 2)
      for (int a = 0; a < Dim; ++a)
        for (int b = 0; b < Dim; ++b) component(j.dd[a][b], k) = ad::partial(yk, a, b);
    if constexpr (Depth >= 3)
      for (int a = 0; a < Dim; ++a)
        for (int b = 0; b < Dim; ++b)
          for (int c = 0; c < Dim; ++c) component(j.ddd[a][b][c], k) = ad::partial(yk, a, b, c);
  }
  return j;
}

}  // namespace detail

template <int Dim, class V>
class SmoothField {
 public:
  using Point = Vec<double, Dim>;
  using Value = V;
  using Evaluator = std::function<V(const Point&)>;
  using JetEvaluator = std::function<Jet<V, Dim>(const Point&, int)>;

  SmoothField() = default;
  SmoothField(std::string name, Box<Dim> box, Evaluator f, JetEvaluator analytic = {})
      : name_(std::move(name)), box_(box), f_(std::move(f)), analytic_(std::move(analytic)) {
    mode_ = analytic_ ? DerivativeMode::Analytic : DerivativeMode::FiniteDifference;
  }

  // The functor must be callable on Vec<T, Dim> for double and nested duals
  // and return V rebound to T.
  template <int MaxOrder = 3, class F>
  static SmoothField from_functor(std::string name, Box<Dim> box, F f) {
    auto value = [f](const Point& p) -> V { return f(p); };
    auto jet = [f](const Point& p, int order) -> Jet<V, Dim> {
      if (order <= 0) {
        Jet<V, Dim> j;
        j.value = f(p);
        return j;
      }
      if constexpr (MaxOrder >= 1)
        if (order == 1) return detail::ad_jet<V, Dim, 1>(f, p);
      if constexpr (MaxOrder >= 2)
        if (order == 2) return detail::ad_jet<V, Dim, 2>(f, p);
      if constexpr (MaxOrder >= 3)
        if (order == 3) return detail::ad_jet<V, Dim, 3>(f, p);
      fail(ErrorCode::InvalidArgument, "jet order ", order, " not available");
    };
    return SmoothField(std::move(name), box, value, jet);
  }

  const std::string& name() const { return name_; }
  const Box<Dim>& box() const { return box_; }
  bool has_analytic() const { return static_cast<bool>(analytic_); }
  DerivativeMode mode() const { return mode_; }
  double step() const { return h_; }
  bool richardson() const { return richardson_; }

  SmoothField& set_mode(DerivativeMode m) {
    if (m == DerivativeMode::Analytic && !analytic_)
      fail(ErrorCode::InvalidArgument, "field '", name_, "' has no analytic derivatives");
    mode_ = m;
    return *this;
  }
  SmoothField& set_step(double h) {
    if (!(h > 0.0)) fail(ErrorCode::InvalidArgument, "finite-difference step must be positive");
    h_ = h;
    return *this;
  }
  SmoothField& set_richardson(bool on) {
    richardson_ = on;
    return *this;
  }
  SmoothField& set_box(const Box<Dim>& b) {
    box_ = b;
    return *this;
  }

  V operator()(const Point& p) const {
    if (!box_.contains(p)) fail(ErrorCode::PointOutsideChart, name_, " at ", format_point(p));
    return f_(p);
  }

  // Distance from the boundary a finite-difference jet of this order needs.
  double margin(int order) const {
    if (mode_ == DerivativeMode::Analytic || order <= 0) return 0.0;
    return order >= 3 ? 2.0 * third_step() : h_;
  }

  Jet<V, Dim> jet(const Point& p, int order) const {
    if (!box_.contains(p)) fail(ErrorCode::PointOutsideChart, name_, " at ", format_point(p));
    if (mode_ == DerivativeMode::Analytic) return analytic_(p, order);
    if (!box_.contains(p, margin(order)))
      fail(ErrorCode::PointOutsideChart, name_, " stencil at ", format_point(p), " leaves the chart");
    Jet<V, Dim> j;
    j.order = order;
    j.value = f_(p);
    if (order >= 1) fd_first_second(p, order, j);
    if (order >= 3) fd_third(p, j);
    return j;
  }

 private:
  double third_step() const { return 10.0 * h_; }

  V at(const Point& p, int i, double si, int k = -1, double sk = 0.0) const {
    Point q = p;
    q[i] += si;
    if (k >= 0) q[k] += sk;
    return f_(q);
  }

  V first(const Point& p, int i, double h) const { return (at(p, i, h) - at(p, i, -h)) * (0.5 / h); }
  V second(const Point& p, int i, int k, double h, const V& f0) const {
    if (i == k) return (at(p, i, h) + at(p, i, -h) - f0 * 2.0) * (1.0 / (h * h));
    return (at(p, i, h, k, h) - at(p, i, h, k, -h) - at(p, i, -h, k, h) + at(p, i, -h, k, -h)) * (0.25 / (h * h));
  }
  V extrapolate(const V& coarse, const V& fine) const {
    return richardson_ ? (fine * 4.0 - coarse) * (1.0 / 3.0) : coarse;
  }

  void fd_first_second(const Point& p, int order, Jet<V, Dim>& j) const {
    const double h = h_;
    for (int i = 0; i < Dim; ++i) j.d[i] = extrapolate(first(p, i, h), first(p, i, 0.5 * h));
    if (order < 2) return;
    for (int i = 0; i < Dim; ++i)
      for (int k = i; k < Dim; ++k) {
        j.dd[i][k] = extrapolate(second(p, i, k, h, j.value), second(p, i, k, 0.5 * h, j.value));
        j.dd[k][i] = j.dd[i][k];
      }
  }

  V third_at(const Point& p, int i, int k, int l, double h) const {
    Point a = p, b = p;
    a[l] += h;
    b[l] -= h;
    return (second(a, i, k, h, f_(a)) - second(b, i, k, h, f_(b))) * (0.5 / h);
  }

  void fd_third(const Point& p, Jet<V, Dim>& j) const {
    const double h = third_step();
    for (int i = 0; i < Dim; ++i)
      for (int k = 0; k < Dim; ++k)
        for (int l = 0; l < Dim; ++l) {
          if (!(i <= k && k <= l)) continue;
          V v = extrapolate(third_at(p, i, k, l, h), third_at(p, i, k, l, 0.5 * h));
          j.ddd[i][k][l] = j.ddd[i][l][k] = j.ddd[k][i][l] = v;
          j.ddd[k][l][i] = j.ddd[l][i][k] = j.ddd[l][k][i] = v;
        }
  }

  std::string name_;
  Box<Dim> box_{};
  Evaluator f_;
  JetEvaluator analytic_;
  DerivativeMode mode_ = DerivativeMode::FiniteDifference;
  double h_ = 1e-3;
  bool richardson_ = true;
};

// Nested duals seeded from a jet, for propagating derivatives through
// algebra on jet values. D1 carries first derivatives, D2 second.
template <int Dim>
using D1 = ad::Dual<double, Dim>;
template <int Dim>
using D2 = ad::Dual<ad::Dual<double, Dim>, Dim>;

template <int Dim>
D1<Dim> seed1(double v, const std::array<double, Dim>& d) {
  D1<Dim> x;
  x.v = v;
  x.d = d;
  return x;
}

template <int Dim>
D2<Dim> seed2(double v, const std::array<double, Dim>& d, const std::array<std::array<double, Dim>, Dim>& dd) {
  D2<Dim> x;
  x.v.v = v;
  x.v.d = d;
  for (int a = 0; a < Dim; ++a) {
    x.d[a].v = d[a];
    x.d[a].d = dd[a];
  }
  return x;
}

// Lifts a jet of a vector/matrix valued field to a D1 or D2 value.
template <class V, int Dim>
auto lift1(const Jet<V, Dim>& j) {
  using R = typename detail::rebind<V, D1<Dim>>::type;
  R r{};
  for (int k = 0; k < detail::component_count<V>(); ++k) {
    std::array<double, Dim> d{};
    for (int a = 0; a < Dim; ++a) d[a] = detail::component(j.d[a], k);
    detail::component(r, k) = seed1<Dim>(detail::component(j.value, k), d);
  }
  return r;
}

template <class V, int Dim>
auto lift2(const Jet<V, Dim>& j) {
  using R = typename detail::rebind<V, D2<Dim>>::type;
  R r{};
  for (int k = 0; k < detail::component_count<V>(); ++k) {
    std::array<double, Dim> d{};
    std::array<std::array<double, Dim>, Dim> dd{};
    for (int a = 0; a < Dim; ++a) {
      d[a] = detail::component(j.d[a], k);
      for (int b = 0; b < Dim; ++b) dd[a][b] = detail::component(j.dd[a][b], k);
    }
    detail::component(r, k) = seed2<Dim>(detail::component(j.value, k), d, dd);
  }
  return r;
}

// Drops the outermost derivative layer: D2 -> D1, D1 -> double.
template <class T, int N>
T lower(const ad::Dual<T, N>& x) {
  return x.v;
}

// Derivative along direction a, dropping one nesting level.
template <class T, int N>
T diff(const ad::Dual<T, N>& x, int a) {
  return x.d[a];
}

template <class T, int N, int M>
Vec<T, M> lower_vec(const Vec<ad::Dual<T, N>, M>& v) {
  Vec<T, M> r;
  for (int i = 0; i < M; ++i) r[i] = v[i].v;
  return r;
}
template <class T, int N, int M>
Vec<T, M> diff_vec(const Vec<ad::Dual<T, N>, M>& v, int a) {
  Vec<T, M> r;
  for (int i = 0; i < M; ++i) r[i] = v[i].d[a];
  return r;
}
template <class T, int N, int R, int C>
Mat<T, R, C> lower_mat(const Mat<ad::Dual<T, N>, R, C>& m) {
  Mat<T, R, C> r;
  for (int i = 0; i < R * C; ++i) r[i] = m[i].v;
  return r;
}
template <class T, int N, int R, int C>
Mat<T, R, C> diff_mat(const Mat<ad::Dual<T, N>, R, C>& m, int a) {
  Mat<T, R, C> r;
  for (int i = 0; i < R * C; ++i) r[i] = m[i].d[a];
  return r;
}

}  // namespace efimov

#pragma once
// Connections compatible with a surface metric, possibly with torsion.
//
// Immersion mode: the dual connection B^-1 nabla (B .) of an immersed patch,
// compatible with the third fundamental form III.
// Abstract mode: a metric h with a torsion vector field tau; the connection
// is Levi-Civita plus beta (x) J with beta = -h(tau, .).
//
// Vectors and tensors are in the coordinate basis of the parameter chart.
// J is rotation by +pi/2 for the chart orientation, and the torsion vector
// is T(f1, f2) for a positively oriented orthonormal frame (f1, f2).

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "efimov/ambient.hpp"
#include "efimov/core/error.hpp"
#include "efimov/core/field.hpp"
#include "efimov/immersion.hpp"

namespace efimov {

using SurfaceMetric = SmoothField<2, Mat2>;
using TangentField = SmoothField<2, Vec2>;

// Matrix of J for the metric h: J x = (-(h x)_2, (h x)_1) / sqrt(det h).
template <class T>
Mat<T, 2> rotation_matrix(const Mat<T, 2>& h) {
  using namespace efimov::math;
  T s = T(1.0) / sqrt(det(h));
  Mat<T, 2> J;
  J(0, 0) = -h(1, 0) * s;
  J(0, 1) = -h(1, 1) * s;
  J(1, 0) = h(0, 0) * s;
  J(1, 1) = h(0, 1) * s;
  return J;
}

// Levi-Civita of h plus beta (x) J, beta = -h(tau, .).
template <class T>
ChristoffelSymbols<T, 2> torsion_connection(const Mat<T, 2>& h, const std::array<Mat<T, 2>, 2>& dh,
                                             const Vec<T, 2>& tau) {
  ChristoffelSymbols<T, 2> G = christoffel_symbols<T, 2>(h, dh);
  Mat<T, 2> J = rotation_matrix(h);
  Vec<T, 2> beta = -(h * tau);
  for (int c = 0; c < 2; ++c)
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) G[c](a, b) += beta[a] * J(c, b);
  return G;
}

// Local connection data at one chart point.
struct ConnectionPoint {
  Vec2 q;
  Mat2 metric;
  std::array<Mat2, 2> dmetric;
  ChristoffelSymbols<double, 2> gamma;
  Vec2 torsion;
  Mat2 J;
};

// Torsion vector recovered from connection coefficients.
inline Vec2 torsion_from_coefficients(const ChristoffelSymbols<double, 2>& G, const Mat2& metric) {
  Vec2 T{{G[0](0, 1) - G[0](1, 0), G[1](0, 1) - G[1](1, 0)}};
  return T / std::sqrt(det(metric));
}

class SurfaceConnection {
 public:
  enum class Mode { Immersion, Abstract };

  static SurfaceConnection immersion(SurfacePatch patch, MetricField ambient, double floor = 1e-10) {
    SurfaceConnection c;
    c.mode_ = Mode::Immersion;
    c.patch_ = std::move(patch);
    c.ambient_ = std::move(ambient);
    c.floor_ = floor;
    return c;
  }

  static SurfaceConnection abstract(SurfaceMetric metric, TangentField torsion) {
    SurfaceConnection c;
    c.mode_ = Mode::Abstract;
    c.metric_ = std::move(metric);
    c.torsion_ = std::move(torsion);
    return c;
  }

  Mode mode() const { return mode_; }
  bool is_immersion() const { return mode_ == Mode::Immersion; }
  double floor() const { return floor_; }
  const Box2& box() const { return is_immersion() ? patch_->box() : metric_->box(); }
  std::string name() const { return is_immersion() ? patch_->name() : metric_->name(); }
  const SurfacePatch& patch() const {
    require_immersion("patch");
    return *patch_;
  }
  const MetricField& ambient() const {
    require_immersion("ambient");
    return *ambient_;
  }
  const SurfaceMetric& surface_metric() const {
    if (is_immersion()) fail(ErrorCode::ModeUnsupported, "immersion mode has no stored surface metric");
    return *metric_;
  }
  const TangentField& torsion_field() const {
    if (is_immersion()) fail(ErrorCode::ModeUnsupported, "immersion mode has no stored torsion field");
    return *torsion_;
  }

  // Immersion data with the shape operator checked against the floor.
  ImmersionJet immersion_jet(const Vec2& q) const {
    require_immersion("immersion_jet");
    ImmersionJet j = efimov::immersion_jet(*patch_, *ambient_, q);
    if (!(std::abs(j.K_e) >= floor_))
      fail(ErrorCode::DegenerateShapeOperator, "|det B| = ", std::abs(j.K_e), " at ", format_point(q));
    return j;
  }

  ConnectionPoint at(const Vec2& q) const {
    ConnectionPoint c;
    c.q = q;
    if (is_immersion()) {
      ImmersionJet j = immersion_jet(q);
      c.metric = j.III;
      c.dmetric = j.dIII;
      c.gamma = j.gamma_dual;
      c.torsion = torsion_from_coefficients(c.gamma, c.metric);
    } else {
      Jet<Mat2, 2> h = metric_jet2(q, 1);
      c.metric = h.value;
      c.dmetric = h.d;
      c.torsion = (*torsion_)(q);
      c.gamma = torsion_connection<double>(h.value, h.d, c.torsion);
    }
    c.J = rotation_matrix(c.metric);
    return c;
  }

  // Curvature of the connection.
  double curvature(const Vec2& q) const {
    if (is_immersion()) {
      ImmersionJet j = immersion_jet(q);
      return j.K_I / j.K_e;
    }
    return frame_curvature(q);
  }

  // Curvature from the connection form of the frame e1 = d_u/|d_u|, e2 = J e1:
  // K dv = -d omega with omega(x) = h(nabla_x e1, e2). Abstract mode only.
  double frame_curvature(const Vec2& q) const {
    if (is_immersion()) fail(ErrorCode::ModeUnsupported, "frame curvature needs the abstract mode");
    using A1 = D1<2>;
    using A2 = D2<2>;
    Jet<Mat2, 2> hj = metric_jet2(q, 2);
    Mat<A2, 2> h2 = lift2(hj);
    Jet<Vec2, 2> tj = torsion_->jet(q, 1);
    Vec<A1, 2> tau = lift1(tj);
    Mat<A1, 2> h1 = lower_mat(h2);
    ChristoffelSymbols<A1, 2> G = torsion_connection<A1>(h1, {diff_mat(h2, 0), diff_mat(h2, 1)}, tau);
    Vec<A2, 2> e1;
    {
      using namespace efimov::math;
      e1[0] = A2(1.0) / sqrt(h2(0, 0));
    }
    Vec<A1, 2> e1l = lower_vec(e1);
    Vec<A1, 2> e2 = rotation_matrix(h1) * e1l;
    std::array<A1, 2> omega;
    for (int a = 0; a < 2; ++a) {
      Vec<A1, 2> da;
      da[a] = A1(1.0);
      Vec<A1, 2> nabla = diff_vec(e1, a) + contract(G, da, e1l);
      omega[a] = form(h1, nabla, e2);
    }
    double domega = omega[1].d[0] - omega[0].d[1];
    return -domega / std::sqrt(det(hj.value));
  }

  // Margin from the chart boundary needed by derivative evaluations.
  double margin() const {
    if (is_immersion()) return std::max(patch_->map.margin(3), 0.0);
    return std::max(metric_->margin(2), torsion_->margin(1));
  }

 private:
  void require_immersion(const char* what) const {
    if (!is_immersion()) fail(ErrorCode::ModeUnsupported, what, " requires an immersed patch");
  }
  Jet<Mat2, 2> metric_jet2(const Vec2& q, int order) const {
    Jet<Mat2, 2> j = metric_->jet(q, order);
    if (!(det(j.value) > 1e-12)) fail(ErrorCode::NonInvertibleMetric, metric_->name(), " at ", format_point(q));
    return j;
  }

  Mode mode_ = Mode::Abstract;
  std::optional<SurfacePatch> patch_;
  std::optional<MetricField> ambient_;
  std::optional<SurfaceMetric> metric_;
  std::optional<TangentField> torsion_;
  double floor_ = 1e-10;
};

// nabla_x y for y extended with constant coordinate components.
inline Vec2 dual_connection_at(const SurfaceConnection& data, const Vec2& q, const Vec2& x, const Vec2& y) {
  return contract(data.at(q).gamma, x, y);
}

inline double ktilde_at(const SurfaceConnection& data, const Vec2& q) { return data.curvature(q); }

// max |d_a III(b, c) - III(G(a, b), c) - III(b, G(a, c))|
inline double compatibility_residual(const ConnectionPoint& c) {
  double r = 0.0;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int d = 0; d < 2; ++d) {
        double s = c.dmetric[a](b, d);
        for (int e = 0; e < 2; ++e) s -= c.gamma[e](a, b) * c.metric(e, d) + c.gamma[e](a, d) * c.metric(b, e);
        r = std::max(r, std::abs(s));
      }
  return r;
}

// |torsion from coefficients - stored torsion|_III
inline double torsion_consistency(const ConnectionPoint& c) {
  return metric_norm(c.metric, torsion_from_coefficients(c.gamma, c.metric) - c.torsion);
}

inline double torsion_norm(const ConnectionPoint& c) { return metric_norm(c.metric, c.torsion); }

// |nabla_x (B~ y) - nabla_y (B~ x)|_III for coordinate fields, B~ = B^-1.
inline double dual_codazzi_residual(const SurfaceConnection& data, const Vec2& q, const Vec2& x, const Vec2& y) {
  ImmersionJet j = data.immersion_jet(q);
  Mat2 Bt = inverse(j.B);
  std::array<Mat2, 2> dBt;
  for (int a = 0; a < 2; ++a) dBt[a] = -(Bt * j.dB[a] * Bt);
  // D[a][b] = nabla_a (B~ d_b)
  Vec2 r{};
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      double w = x[a] * y[b] - x[b] * y[a];
      if (w == 0.0) continue;
      for (int c = 0; c < 2; ++c) {
        double s = dBt[a](c, b);
        for (int e = 0; e < 2; ++e) s += j.gamma_dual[c](a, e) * Bt(e, b);
        r[c] += w * s;
      }
    }
  return metric_norm(j.III, r);
}

// (d^nabla B)(x, y) measured in I, which equals |tau(x, y)|_III for
// III-orthonormal x, y.
inline double codazzi_defect_norm(const SurfaceConnection& data, const Vec2& q, const Vec2& x, const Vec2& y) {
  ImmersionJet j = data.immersion_jet(q);
  double w = x[0] * y[1] - x[1] * y[0];
  return std::abs(w) * metric_norm(j.I, j.codazzi_lhs);
}

// ---- pinching constants and hypothesis checks ----

inline void require_finite(std::initializer_list<double> xs) {
  for (double x : xs)
    if (!std::isfinite(x)) fail(ErrorCode::InvalidPinching, "non-finite curvature constant");
}

// (K_M - K_m) / (2 sqrt((K_m - K_1)(K_M - K_1)))
inline double torsion_bound_tau0(double Km, double KM, double K1) {
  require_finite({Km, KM, K1});
  if (!(K1 < Km) || !(Km <= KM))
    fail(ErrorCode::InvalidPinching, "need K1 < K_m <= K_M, got K_m=", Km, " K_M=", KM, " K1=", K1);
  if (Km == KM) return 0.0;
  return (KM - Km) / (2.0 * std::sqrt((Km - K1) * (KM - K1)));
}

// Square root of the maximum over alpha in [0, 1] of
// (q1-q2)^2 a(1-a) / ((q1-q2) a + q2 - K1)^2: a uniform grid, then golden
// section inside the bracket of the best grid point. The peak gets narrow
// as min(q1, q2) approaches K1, where the grid alone is off by ~1e-2.
inline double torsion_bound_bruteforce(double q1, double q2, double K1, int grid_size) {
  require_finite({q1, q2, K1});
  if (!(K1 < std::min(q1, q2))) fail(ErrorCode::InvalidPinching, "need K1 < min(q1, q2)");
  if (grid_size < 1000) fail(ErrorCode::InvalidArgument, "grid_size must be at least 1000");
  auto f = [&](double a) {
    double den = (q1 - q2) * a + q2 - K1;
    return (q1 - q2) * (q1 - q2) * a * (1.0 - a) / (den * den);
  };
  int best_i = 0;
  double best = 0.0;
  for (int i = 0; i <= grid_size; ++i) {
    double v = f(static_cast<double>(i) / grid_size);
    if (v > best) {
      best = v;
      best_i = i;
    }
  }
  double lo = static_cast<double>(std::max(best_i - 1, 0)) / grid_size;
  double hi = static_cast<double>(std::min(best_i + 1, grid_size)) / grid_size;
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    double a = hi - r * (hi - lo), b = lo + r * (hi - lo);
    if (f(a) < f(b))
      lo = a;
    else
      hi = b;
  }
  return std::sqrt(std::max(best, f(0.5 * (lo + hi))));
}

// K5 bounds the curvature of the dual connection from above, K4 from below.
inline std::pair<double, double> curvature_bounds_k4k5(double K1, double K2, double K3) {
  require_finite({K1, K2, K3});
  if (!(K1 < 0.0) || !(K1 < K2) || !(K2 <= K3))
    fail(ErrorCode::InvalidPinching, "need K1 < 0 and K1 < K2 <= K3, got ", K1, ", ", K2, ", ", K3);
  double K5 = K2 >= 0.0 ? 1.0 : K1 / (K1 - K2);
  double K4 = K3 <= 0.0 ? 1.0 : K1 / (K1 - K3);
  return {K4, K5};
}

enum class Regime { K3NonNegative, K3NonPositive, Both };

inline const char* to_string(Regime r) {
  switch (r) {
    case Regime::K3NonNegative: return "K3>=0";
    case Regime::K3NonPositive: return "K3<=0";
    case Regime::Both: return "K3=0";
  }
  return "";
}

struct HypothesisVerdict {
  double K1 = 0, K2 = 0, K3 = 0;
  Regime regime = Regime::Both;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;
  bool excluded = false;
  // false when K2 <= K1: the inequality sides are still reported
  bool admissible = true;
  bool regimes_agree = true;
  double tau0 = std::numeric_limits<double>::quiet_NaN();
  double K4 = std::numeric_limits<double>::quiet_NaN();
  double K5 = std::numeric_limits<double>::quiet_NaN();
  bool sit_check = false;
  bool th1_cond0 = false;
  bool th1_tau0 = false;
};

// Evaluates the strict inequality (K3 - K2)^2 < rhs, where
// rhs = 16 |K1| (K2 - K1) for K3 >= 0 and 16 (K3 - K1)(K2 - K1) for K3 <= 0,
// together with 4 K4 > tau0^2 and the two conditions of the refined
// statement (th1_tau0 keeps the case split of the reference form, see README).
inline HypothesisVerdict check_hypothesis(double K1, double K2, double K3) {
  require_finite({K1, K2, K3});
  if (!(K1 < 0.0)) fail(ErrorCode::InvalidPinching, "need K1 < 0, got ", K1);
  if (!(K2 <= K3)) fail(ErrorCode::InvalidPinching, "need K2 <= K3, got ", K2, " > ", K3);
  HypothesisVerdict v;
  v.K1 = K1;
  v.K2 = K2;
  v.K3 = K3;
  v.admissible = K1 < K2;
  v.lhs = (K3 - K2) * (K3 - K2);
  double rhs_pos = 16.0 * std::abs(K1) * (K2 - K1);
  double rhs_neg = 16.0 * (K3 - K1) * (K2 - K1);
  if (K3 > 0.0) {
    v.regime = Regime::K3NonNegative;
    v.rhs = rhs_pos;
  } else if (K3 < 0.0) {
    v.regime = Regime::K3NonPositive;
    v.rhs = rhs_neg;
  } else {
    v.regime = Regime::Both;
    v.rhs = rhs_pos;
    v.regimes_agree = (rhs_pos == rhs_neg);
  }
  v.margin = v.rhs - v.lhs;
  if (!v.admissible) return v;
  v.excluded = v.margin > 0.0;
  v.tau0 = torsion_bound_tau0(K2, K3, K1);
  std::tie(v.K4, v.K5) = curvature_bounds_k4k5(K1, K2, K3);
  v.sit_check = 4.0 * v.K4 > v.tau0 * v.tau0;
  double lhs0 = (K3 - K2) / (2.0 * std::sqrt((K1 - K3) * (K1 - K2)));
  v.th1_cond0 = (K3 == K2) || lhs0 <= v.tau0;
  double cap = K3 <= 0.0 ? 4.0 * K1 / (K1 - K3) : 4.0;
  v.th1_tau0 = v.tau0 * v.tau0 < cap;
  return v;
}

// Pinching constants measured on a set of surface samples.
struct BoundSet {
  double K1 = 0, K2 = 0, K3 = 0, K4 = 0, K5 = 0;
  double tau0 = 0;  // closed form from (K2, K3, K1)
  double tau0_measured = 0;  // sup of the torsion norm
  double tau1 = std::numeric_limits<double>::quiet_NaN();
  double ktilde_min = 0, ktilde_max = 0;
};

inline BoundSet measure_bounds(const SurfaceConnection& data, const std::vector<Vec2>& samples) {
  if (samples.empty()) fail(ErrorCode::InvalidArgument, "no samples");
  BoundSet b;
  b.K1 = -std::numeric_limits<double>::infinity();
  b.K2 = std::numeric_limits<double>::infinity();
  b.K3 = -std::numeric_limits<double>::infinity();
  b.ktilde_min = std::numeric_limits<double>::infinity();
  b.ktilde_max = -std::numeric_limits<double>::infinity();
  for (const Vec2& q : samples) {
    ImmersionJet j = data.immersion_jet(q);
    auto [lo, hi] = sectional_range_from(j.ambient_R, j.g);
    b.K1 = std::max(b.K1, j.K_I);
    b.K2 = std::min(b.K2, lo);
    b.K3 = std::max(b.K3, hi);
    double kt = j.K_I / j.K_e;
    b.ktilde_min = std::min(b.ktilde_min, kt);
    b.ktilde_max = std::max(b.ktilde_max, kt);
    b.tau0_measured =
        std::max(b.tau0_measured, metric_norm(j.III, torsion_from_coefficients(j.gamma_dual, j.III)));
  }
  std::tie(b.K4, b.K5) = curvature_bounds_k4k5(b.K1, b.K2, b.K3);
  b.tau0 = torsion_bound_tau0(b.K2, b.K3, b.K1);
  return b;
}

}  // namespace efimov

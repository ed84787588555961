#pragma once
// Curves for a metric-compatible connection: geodesics, parallel transport,
// geodesic curvature, Jacobi-type fields along a geodesic, Gauss-Bonnet with
// corners and torsion, and the first variation of geodesic curvature under a
// normal deformation.
//
// Lengths and angles use the connection's metric (III in immersion mode).
// Region boundaries run counterclockwise: J of the velocity points inside.

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "efimov/connection.hpp"
#include "efimov/core/numerics.hpp"

namespace efimov {

struct CurveSample {
  double s = 0.0;
  Vec2 point;
  Vec2 velocity;
};

enum class TraceStatus { Complete, LeftPatch };

struct CurveTrace {
  std::vector<CurveSample> samples;
  double step = 0.0;
  double length = 0.0;  // length actually traced
  bool closed = false;
  TraceStatus status = TraceStatus::Complete;
  std::string message;

  bool complete() const { return status == TraceStatus::Complete; }
  const CurveSample& front() const { return samples.front(); }
  const CurveSample& back() const { return samples.back(); }
};

// Smooth curve with exact derivatives in its own parameter t in [t0, t1].
struct ParametrizedCurve {
  std::function<Vec2(double)> position;
  std::function<Vec2(double)> velocity;
  std::function<Vec2(double)> acceleration;
  double t0 = 0.0;
  double t1 = 1.0;
};

// Chart circle, counterclockwise, t in [0, 2 pi].
inline ParametrizedCurve chart_circle(const Vec2& center, double radius) {
  ParametrizedCurve c;
  c.position = [=](double t) { return center + Vec2{{radius * std::cos(t), radius * std::sin(t)}}; };
  c.velocity = [=](double t) { return Vec2{{-radius * std::sin(t), radius * std::cos(t)}}; };
  c.acceleration = [=](double t) { return Vec2{{-radius * std::cos(t), -radius * std::sin(t)}}; };
  c.t0 = 0.0;
  c.t1 = 2.0 * M_PI;
  return c;
}

namespace detail {

using State4 = Vec<double, 4>;

inline State4 pack(const Vec2& q, const Vec2& v) { return State4{{q[0], q[1], v[0], v[1]}}; }
inline Vec2 head(const State4& y) { return Vec2{{y[0], y[1]}}; }
inline Vec2 tail(const State4& y) { return Vec2{{y[2], y[3]}}; }

inline State4 geodesic_rhs(const SurfaceConnection& data, const State4& y) {
  Vec2 v = tail(y);
  Vec2 a = -contract(data.at(head(y)).gamma, v, v);
  return pack(v, a);
}

constexpr double kClosedTol = 1e-6;

inline void mark_closed(CurveTrace& tr) {
  tr.length = tr.samples.back().s;
  tr.closed = tr.samples.size() > 2 && norm(tr.samples.back().point - tr.samples.front().point) < kClosedTol;
}

inline int step_count(double L, double step) {
  if (!(step > 0.0) || !(L >= 0.0) || !std::isfinite(L)) fail(ErrorCode::InvalidArgument, "need L >= 0 and step > 0");
  return std::max(1, static_cast<int>(std::ceil(L / step - 1e-9)));
}

// 5-point (or 3-point near the ends) derivative of uniformly spaced samples.
inline Vec2 sample_derivative(const std::vector<Vec2>& v, std::size_t i, double h, bool allow_ends) {
  std::size_t n = v.size();
  if (i >= 2 && i + 2 < n) return (v[i - 2] - v[i - 1] * 8.0 + v[i + 1] * 8.0 - v[i + 2]) / (12.0 * h);
  if (i >= 1 && i + 1 < n) return (v[i + 1] - v[i - 1]) / (2.0 * h);
  if (!allow_ends || n < 3) fail(ErrorCode::EndpointSample, "sample ", i, " of ", n, " has no centered stencil");
  if (i == 0) return (v[0] * -3.0 + v[1] * 4.0 - v[2]) / (2.0 * h);
  return (v[n - 1] * 3.0 - v[n - 2] * 4.0 + v[n - 3]) / (2.0 * h);
}

inline double fd1(const std::function<double(double)>& f, double t, double h) {
  return (f(t - 2 * h) - 8.0 * f(t - h) + 8.0 * f(t + h) - f(t + 2 * h)) / (12.0 * h);
}

// Position and velocity along a trace at arclength offset r from sample i.
inline std::pair<Vec2, Vec2> trace_hermite(const CurveTrace& tr, std::size_t i, double r) {
  const CurveSample& a = tr.samples[i];
  const CurveSample& b = tr.samples[i + 1];
  double h = b.s - a.s;
  double t = r / h;
  return {hermite(a.point, a.velocity, b.point, b.velocity, h, t),
          hermite_derivative(a.point, a.velocity, b.point, b.velocity, h, t)};
}

}  // namespace detail

// Geodesic spray integrated with fixed classical RK4 steps.
// The trace stops early with status LeftPatch at the chart boundary.
inline CurveTrace integrate_geodesic(const SurfaceConnection& data, const Vec2& q, const Vec2& v, double L,
                                     double step) {
  int n = detail::step_count(L, step);
  double speed = metric_norm(data.at(q).metric, v);
  if (std::abs(speed - 1.0) > 1e-9) fail(ErrorCode::InvalidArgument, "initial speed ", speed, ", expected 1");
  CurveTrace tr;
  tr.step = L / n;
  tr.samples.push_back({0.0, q, v});
  detail::State4 y = detail::pack(q, v);
  auto rhs = [&](double, const detail::State4& s) { return detail::geodesic_rhs(data, s); };
  try {
    for (int i = 0; i < n && L > 0.0; ++i) {
      y = rk4_step(rhs, i * tr.step, y, tr.step);
      tr.samples.push_back({(i + 1) * tr.step, detail::head(y), detail::tail(y)});
    }
  } catch (const Error& e) {
    if (e.code() != ErrorCode::PointOutsideChart) throw;
    tr.status = TraceStatus::LeftPatch;
    tr.message = e.what();
  }
  detail::mark_closed(tr);
  return tr;
}

// Integral curve of a position-dependent velocity field, same scheme.
// on_step(sample) runs after each accepted step.
template <class Field, class OnStep>
CurveTrace integrate_flow(const Vec2& q, double L, double step, const Field& field, const OnStep& on_step) {
  int n = detail::step_count(L, step);
  CurveTrace tr;
  tr.step = L / n;
  Vec2 p = q;
  auto rhs = [&](double, const Vec2& x) { return field(x); };
  try {
    tr.samples.push_back({0.0, p, field(p)});
    on_step(tr.samples.back());
    for (int i = 0; i < n && L > 0.0; ++i) {
      p = rk4_step(rhs, i * tr.step, p, tr.step);
      tr.samples.push_back({(i + 1) * tr.step, p, field(p)});
      on_step(tr.samples.back());
    }
  } catch (const Error& e) {
    if (e.code() != ErrorCode::PointOutsideChart || tr.samples.empty()) throw;
    tr.status = TraceStatus::LeftPatch;
    tr.message = e.what();
  }
  detail::mark_closed(tr);
  return tr;
}

template <class Field>
CurveTrace integrate_flow(const Vec2& q, double L, double step, const Field& field) {
  return integrate_flow(q, L, step, field, [](const CurveSample&) {});
}

// Point and velocity at arclength s, by Hermite interpolation between samples.
inline std::pair<Vec2, Vec2> trace_eval(const CurveTrace& tr, double s) {
  if (tr.samples.size() < 2) fail(ErrorCode::InvalidArgument, "trace has no length");
  double k = std::clamp(std::floor(s / tr.step), 0.0, static_cast<double>(tr.samples.size() - 2));
  auto i = static_cast<std::size_t>(k);
  return detail::trace_hermite(tr, i, s - tr.samples[i].s);
}

// exp_q(w): the geodesic with initial velocity w at parameter 1.
inline Vec2 exp_map(const SurfaceConnection& data, const Vec2& q, const Vec2& w, int steps = 16) {
  detail::State4 y = detail::pack(q, w);
  auto rhs = [&](double, const detail::State4& s) { return detail::geodesic_rhs(data, s); };
  double h = 1.0 / steps;
  for (int i = 0; i < steps; ++i) y = rk4_step(rhs, i * h, y, h);
  return detail::head(y);
}

struct TransportResult {
  Vec2 vector;                // transported vector at the end
  std::vector<Vec2> history;  // one entry per trace sample
  double norm_drift = 0.0;    // max deviation of the metric norm
};

// Solves nabla_{c'} W = 0 along the trace; the curve between samples is
// the cubic Hermite interpolant of positions and velocities.
inline TransportResult parallel_transport(const SurfaceConnection& data, const CurveTrace& trace, const Vec2& W) {
  if (trace.samples.empty()) fail(ErrorCode::InvalidArgument, "empty trace");
  TransportResult r;
  Vec2 w = W;
  double n0 = metric_norm(data.at(trace.front().point).metric, W);
  r.history.push_back(w);
  for (std::size_t i = 0; i + 1 < trace.samples.size(); ++i) {
    double h = trace.samples[i + 1].s - trace.samples[i].s;
    auto rhs = [&](double t, const Vec2& x) {
      auto [p, v] = detail::trace_hermite(trace, i, t);
      return -contract(data.at(p).gamma, v, x);
    };
    w = rk4_step(rhs, 0.0, w, h);
    r.history.push_back(w);
    r.norm_drift = std::max(r.norm_drift, std::abs(metric_norm(data.at(trace.samples[i + 1].point).metric, w) - n0));
  }
  r.vector = w;
  return r;
}

inline TransportResult parallel_transport(const SurfaceConnection& data, const ParametrizedCurve& c, const Vec2& W,
                                          int steps = 2048) {
  TransportResult r;
  Vec2 w = W;
  double n0 = metric_norm(data.at(c.position(c.t0)).metric, W);
  double h = (c.t1 - c.t0) / steps;
  r.history.push_back(w);
  auto rhs = [&](double t, const Vec2& x) { return -contract(data.at(c.position(t)).gamma, c.velocity(t), x); };
  for (int i = 0; i < steps; ++i) {
    double t = c.t0 + i * h;
    w = rk4_step(rhs, t, w, h);
    r.history.push_back(w);
    r.norm_drift = std::max(r.norm_drift, std::abs(metric_norm(data.at(c.position(t + h)).metric, w) - n0));
  }
  r.vector = w;
  return r;
}

// kappa = metric(nabla_{c'} c', J c') / |c'|^3 from the acceleration a = c''.
inline double curvature_from(const ConnectionPoint& c, const Vec2& v, const Vec2& a) {
  Vec2 cov = a + contract(c.gamma, v, v);
  double speed = metric_norm(c.metric, v);
  return form(c.metric, cov, c.J * v) / (speed * speed * speed);
}

// Geodesic curvature at an interior sample, by differentiating the sampled
// velocities (5-point stencil, 3-point next to the ends).
inline double geodesic_curvature(const SurfaceConnection& data, const CurveTrace& trace, std::size_t i) {
  std::vector<Vec2> v;
  v.reserve(trace.samples.size());
  for (const auto& s : trace.samples) v.push_back(s.velocity);
  Vec2 a = detail::sample_derivative(v, i, trace.step, false);
  return curvature_from(data.at(trace.samples[i].point), trace.samples[i].velocity, a);
}

// Same, at the sample nearest to arclength s.
inline double geodesic_curvature(const SurfaceConnection& data, const CurveTrace& trace, double s) {
  if (trace.samples.empty() || !(trace.step > 0.0)) fail(ErrorCode::InvalidArgument, "empty trace");
  double k = std::round(s / trace.step);
  if (k < 0 || k >= static_cast<double>(trace.samples.size()))
    fail(ErrorCode::EndpointSample, "s = ", s, " outside the trace");
  return geodesic_curvature(data, trace, static_cast<std::size_t>(k));
}

inline double geodesic_curvature(const SurfaceConnection& data, const ParametrizedCurve& c, double t) {
  return curvature_from(data.at(c.position(t)), c.velocity(t), c.acceleration(t));
}

// ---- Jacobi-type fields ----

// K(t), tau_x(t), tau_y(t) along a unit-speed geodesic g, with
// tau_x = metric(tau, g') and tau_y = metric(tau, J g').
struct JacobiCoefficients {
  std::function<double(double)> K;
  std::function<double(double)> tau_x;
  std::function<double(double)> tau_y;
};

struct JacobiSample {
  double t = 0, x = 0, y = 0, dx = 0, dy = 0;
  double K = 0, tau_x = 0, tau_y = 0;
};

struct JacobiTrace {
  std::vector<JacobiSample> samples;
  double step = 0.0;
  double tau0 = 0.0;        // sup of |tau| along the samples
  double t_g = 0.0;         // largest t with y'(0) t / 2 <= y <= 2 y'(0) t on (0, t]
  bool x_bound = false;     // |x| <= tau0 y'(0) t^2 on (0, t_g]
  double x_residual = 0.0;  // max |x' - y tau_x|
};

namespace detail {

using Coeff3 = std::array<double, 3>;  // K, tau_x, tau_y

// x' = y tau_x, y'' = -K y + (y tau_y)', written with w = y' - y tau_y as
// x' = y tau_x, y' = w + y tau_y, w' = -K y.
inline JacobiTrace integrate_jacobi(const std::function<Coeff3(double)>& coeff, double L, double x0, double y0,
                                    double dx0, double dy0, double step) {
  int n = step_count(L, step);
  double h = L / n;
  Coeff3 c0 = coeff(0.0);
  if (std::abs(dx0 - y0 * c0[1]) > 1e-9 * std::max(1.0, std::abs(dx0)))
    fail(ErrorCode::InvalidArgument, "x'(0) = ", dx0, " but y(0) tau_x(0) = ", y0 * c0[1]);
  using S = Vec<double, 3>;
  auto rhs = [&](double t, const S& s) {
    Coeff3 c = coeff(t);
    return S{{s[1] * c[1], s[2] + s[1] * c[2], -c[0] * s[1]}};
  };
  auto sample = [&](double t, const S& s, const Coeff3& c) {
    return JacobiSample{t, s[0], s[1], s[1] * c[1], s[2] + s[1] * c[2], c[0], c[1], c[2]};
  };
  JacobiTrace tr;
  tr.step = h;
  S s{{x0, y0, dy0 - y0 * c0[2]}};
  tr.samples.push_back(sample(0.0, s, c0));
  for (int i = 0; i < n && L > 0.0; ++i) {
    s = rk4_step(rhs, i * h, s, h);
    double t = (i + 1) * h;
    tr.samples.push_back(sample(t, s, coeff(t)));
  }
  double dy = tr.samples.front().dy;
  bool sandwich = dy > 0.0;
  for (const auto& js : tr.samples) {
    tr.tau0 = std::max(tr.tau0, std::hypot(js.tau_x, js.tau_y));
    tr.x_residual = std::max(tr.x_residual, std::abs(js.dx - js.y * js.tau_x));
  }
  tr.x_bound = sandwich;
  for (const auto& js : tr.samples) {
    if (js.t == 0.0) continue;
    if (sandwich && (js.y < 0.5 * dy * js.t || js.y > 2.0 * dy * js.t)) sandwich = false;
    if (!sandwich) break;
    tr.t_g = js.t;
    if (std::abs(js.x) > tr.tau0 * dy * js.t * js.t * (1.0 + 1e-12) + 1e-15) tr.x_bound = false;
  }
  return tr;
}

}  // namespace detail

inline JacobiTrace jacobi_field(const JacobiCoefficients& coeff, double L, double x0, double y0, double dx0,
                                double dy0, double step) {
  auto c = [&](double t) { return detail::Coeff3{coeff.K(t), coeff.tau_x(t), coeff.tau_y(t)}; };
  return detail::integrate_jacobi(c, L, x0, y0, dx0, dy0, step);
}

// Along a geodesic trace. Off-sample points are reached by a geodesic step
// from the preceding sample.
inline JacobiTrace jacobi_field(const SurfaceConnection& data, const CurveTrace& base, double x0, double y0,
                                double dx0, double dy0, double step) {
  if (base.samples.size() < 2) fail(ErrorCode::InvalidArgument, "base trace has no length");
  auto c = [&](double t) {
    auto i = static_cast<std::size_t>(std::clamp(std::floor(t / base.step + 1e-9), 0.0,
                                                 static_cast<double>(base.samples.size() - 2)));
    const CurveSample& smp = base.samples[i];
    detail::State4 y = detail::pack(smp.point, smp.velocity);
    double r = t - smp.s;
    if (std::abs(r) > 1e-12) {
      auto rhs = [&](double, const detail::State4& s) { return detail::geodesic_rhs(data, s); };
      y = rk4_step(rhs, 0.0, y, r);
    }
    Vec2 q = detail::head(y), v = detail::tail(y);
    ConnectionPoint cp = data.at(q);
    return detail::Coeff3{data.curvature(q), form(cp.metric, cp.torsion, v), form(cp.metric, cp.torsion, cp.J * v)};
  };
  return detail::integrate_jacobi(c, base.length, x0, y0, dx0, dy0, step);
}

// ---- regions and Gauss-Bonnet ----

// One smooth boundary arc: either an exact curve or a sampled trace.
struct BoundaryPiece {
  std::optional<ParametrizedCurve> curve;
  std::optional<CurveTrace> trace;

  Vec2 start_point() const { return curve ? curve->position(curve->t0) : trace->front().point; }
  Vec2 start_velocity() const { return curve ? curve->velocity(curve->t0) : trace->front().velocity; }
  Vec2 end_point() const { return curve ? curve->position(curve->t1) : trace->back().point; }
  Vec2 end_velocity() const { return curve ? curve->velocity(curve->t1) : trace->back().velocity; }
};

// Counterclockwise boundary, star-shaped in the chart about `center`.
struct RegionSpec {
  std::vector<BoundaryPiece> boundary;
  std::optional<Vec2> center;  // default: mean of the corner points / curve samples
  int radial_nodes = 24;
  int angular_nodes = 256;
  double closure_tol = 1e-6;
};

inline RegionSpec circle_region(const Vec2& center, double radius) {
  RegionSpec r;
  r.boundary.push_back({chart_circle(center, radius), std::nullopt});
  r.center = center;
  return r;
}

struct PolygonSide {
  double length = 0.0;
  double turn = 0.0;  // exterior angle at the end of the side, left positive
};

// Geodesic polygon: sides traced in turn, rotating the velocity by `turn`
// (with J) at the end of each side. `direction` is rescaled to unit speed.
inline RegionSpec geodesic_polygon(const SurfaceConnection& data, const Vec2& start, const Vec2& direction,
                                   const std::vector<PolygonSide>& sides, double step) {
  if (sides.empty()) fail(ErrorCode::InvalidArgument, "polygon without sides");
  RegionSpec r;
  Vec2 q = start;
  Vec2 v = direction / metric_norm(data.at(start).metric, direction);
  for (const PolygonSide& side : sides) {
    CurveTrace tr = integrate_geodesic(data, q, v, side.length, step);
    if (!tr.complete()) fail(ErrorCode::LeftPatch, "polygon side: ", tr.message);
    q = tr.back().point;
    Vec2 w = tr.back().velocity;
    ConnectionPoint cp = data.at(q);
    v = w * std::cos(side.turn) + (cp.J * w) * std::sin(side.turn);
    v = v / metric_norm(cp.metric, v);
    r.boundary.push_back({std::nullopt, std::move(tr)});
  }
  return r;
}

struct GaussBonnetReport {
  double curvature_integral = 0.0;  // integral of K over D
  double boundary_integral = 0.0;   // integral of kappa ds over the boundary
  double corner_sum = 0.0;
  double area = 0.0;
  double closure_gap = 0.0;
  double residual = 0.0;  // |curvature + boundary + corners - 2 pi|
  std::vector<double> exterior_angles;
};

namespace detail {

// Signed angle from a to b, positive when b is on the J side of a.
inline double signed_angle(const ConnectionPoint& c, const Vec2& a, const Vec2& b) {
  return std::atan2(form(c.metric, c.J * a, b), form(c.metric, a, b));
}

inline double wrap_angle(double a) { return std::remainder(a, 2.0 * M_PI); }

// Curvature and area density at a chart point.
inline std::pair<double, double> curvature_density(const SurfaceConnection& data, const Vec2& q) {
  if (data.is_immersion()) {
    ImmersionJet j = data.immersion_jet(q);
    return {j.K_I / j.K_e, std::sqrt(det(j.III))};
  }
  return {data.frame_curvature(q), std::sqrt(det(data.surface_metric()(q)))};
}

struct HermiteSegment {
  Vec2 p0, d0, p1, d1;
  double h;
};

inline std::vector<HermiteSegment> boundary_segments(const RegionSpec& region, int per_curve) {
  std::vector<HermiteSegment> segs;
  for (const BoundaryPiece& piece : region.boundary) {
    if (piece.curve) {
      const ParametrizedCurve& c = *piece.curve;
      double h = (c.t1 - c.t0) / per_curve;
      for (int k = 0; k < per_curve; ++k) {
        double a = c.t0 + k * h, b = c.t0 + (k + 1) * h;
        segs.push_back({c.position(a), c.velocity(a), c.position(b), c.velocity(b), h});
      }
    } else {
      const auto& s = piece.trace->samples;
      for (std::size_t i = 0; i + 1 < s.size(); ++i)
        segs.push_back({s[i].point, s[i].velocity, s[i + 1].point, s[i + 1].velocity, s[i + 1].s - s[i].s});
    }
  }
  return segs;
}

inline double cross2(const Vec2& a, const Vec2& b) { return a[0] * b[1] - a[1] * b[0]; }

// Chart distance from c to the boundary along direction d.
inline double ray_radius(const std::vector<HermiteSegment>& segs, const Vec2& c, const Vec2& d) {
  double best = -1.0;
  auto f = [&](const HermiteSegment& g, double t) { return cross2(d, hermite(g.p0, g.d0, g.p1, g.d1, g.h, t) - c); };
  for (const HermiteSegment& g : segs) {
    double f0 = f(g, 0.0), f1 = f(g, 1.0);
    if (f0 * f1 > 0.0) continue;
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 80 && f0 != 0.0; ++it) {
      double mid = 0.5 * (lo + hi);
      double fm = f(g, mid);
      if ((fm > 0.0) == (f0 > 0.0))
        lo = mid;
      else
        hi = mid;
    }
    double t = f0 == 0.0 ? 0.0 : 0.5 * (lo + hi);
    Vec2 p = hermite(g.p0, g.d0, g.p1, g.d1, g.h, t) - c;
    if (dot(p, d) > 0.0 && (best < 0.0 || norm(p) < best)) best = norm(p);
  }
  if (best <= 0.0) fail(ErrorCode::InvalidArgument, "region is not star-shaped about its center");
  return best;
}

inline Vec2 region_center(const RegionSpec& region) {
  if (region.center) return *region.center;
  Vec2 c{};
  int n = 0;
  for (const BoundaryPiece& piece : region.boundary) {
    if (piece.curve) {
      for (int k = 0; k < 64; ++k) {
        c += piece.curve->position(piece.curve->t0 + (piece.curve->t1 - piece.curve->t0) * k / 64.0);
        ++n;
      }
    } else {
      c += piece.start_point();
      ++n;
    }
  }
  return c / static_cast<double>(n);
}

// Integral of kappa ds over one piece.
inline double piece_curvature_integral(const SurfaceConnection& data, const BoundaryPiece& piece) {
  if (piece.curve) {
    const ParametrizedCurve& c = *piece.curve;
    constexpr int panels = 64;
    GaussRule g = gauss_legendre(6);
    double h = (c.t1 - c.t0) / panels, sum = 0.0;
    for (int p = 0; p < panels; ++p)
      for (std::size_t k = 0; k < g.x.size(); ++k) {
        double t = c.t0 + h * (p + 0.5 * (g.x[k] + 1.0));
        ConnectionPoint cp = data.at(c.position(t));
        double speed = metric_norm(cp.metric, c.velocity(t));
        sum += 0.5 * h * g.w[k] * curvature_from(cp, c.velocity(t), c.acceleration(t)) * speed;
      }
    return sum;
  }
  const CurveTrace& tr = *piece.trace;
  std::vector<Vec2> v;
  for (const auto& s : tr.samples) v.push_back(s.velocity);
  double sum = 0.0;
  std::vector<double> f(tr.samples.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    ConnectionPoint cp = data.at(tr.samples[i].point);
    Vec2 a = sample_derivative(v, i, tr.step, true);
    f[i] = curvature_from(cp, v[i], a) * metric_norm(cp.metric, v[i]);
  }
  for (std::size_t i = 0; i + 1 < f.size(); ++i)
    sum += 0.5 * (tr.samples[i + 1].s - tr.samples[i].s) * (f[i] + f[i + 1]);
  return sum;
}

}  // namespace detail

// Integral of K over the region and its area, in chart polar coordinates
// about the region center: Gauss-Legendre in the radius, periodic
// trapezoid in the angle (Gauss-Legendre between corners for polygons).
inline std::pair<double, double> region_integral(const SurfaceConnection& data, const RegionSpec& region) {
  Vec2 c = detail::region_center(region);
  auto segs = detail::boundary_segments(region, 512);
  std::vector<double> phi, wphi;
  if (region.boundary.size() <= 1) {
    int n = region.angular_nodes;
    for (int k = 0; k < n; ++k) {
      phi.push_back(2.0 * M_PI * k / n);
      wphi.push_back(2.0 * M_PI / n);
    }
  } else {
    std::vector<double> corners;
    for (const BoundaryPiece& p : region.boundary) {
      Vec2 d = p.start_point() - c;
      corners.push_back(std::atan2(d[1], d[0]));
    }
    std::sort(corners.begin(), corners.end());
    int per = std::max(8, region.angular_nodes / static_cast<int>(corners.size()));
    GaussRule g = gauss_legendre(per);
    for (std::size_t i = 0; i < corners.size(); ++i) {
      double a = corners[i];
      double b = i + 1 < corners.size() ? corners[i + 1] : corners[0] + 2.0 * M_PI;
      for (std::size_t k = 0; k < g.x.size(); ++k) {
        phi.push_back(a + 0.5 * (b - a) * (g.x[k] + 1.0));
        wphi.push_back(0.5 * (b - a) * g.w[k]);
      }
    }
  }
  GaussRule gr = gauss_legendre(region.radial_nodes);
  auto rows = parallel_map(phi.size(), [&](std::size_t i) {
    Vec2 d{{std::cos(phi[i]), std::sin(phi[i])}};
    double R = detail::ray_radius(segs, c, d);
    double k_sum = 0.0, a_sum = 0.0;
    for (std::size_t k = 0; k < gr.x.size(); ++k) {
      double rho = 0.5 * R * (gr.x[k] + 1.0);
      auto [K, dens] = detail::curvature_density(data, c + d * rho);
      double w = 0.5 * R * gr.w[k] * rho * dens;
      k_sum += w * K;
      a_sum += w;
    }
    return std::pair<double, double>{k_sum, a_sum};
  });
  double K = 0.0, A = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    K += wphi[i] * rows[i].first;
    A += wphi[i] * rows[i].second;
  }
  return {K, A};
}

inline GaussBonnetReport gauss_bonnet(const SurfaceConnection& data, const RegionSpec& region) {
  if (region.boundary.empty()) fail(ErrorCode::OpenBoundary, "region without boundary");
  GaussBonnetReport r;
  std::size_t n = region.boundary.size();
  for (std::size_t i = 0; i < n; ++i) {
    const BoundaryPiece& a = region.boundary[i];
    const BoundaryPiece& b = region.boundary[(i + 1) % n];
    r.closure_gap = std::max(r.closure_gap, norm(a.end_point() - b.start_point()));
  }
  if (!(r.closure_gap < region.closure_tol))
    fail(ErrorCode::OpenBoundary, "boundary gap ", r.closure_gap, " exceeds ", region.closure_tol);
  for (std::size_t i = 0; i < n; ++i) {
    const BoundaryPiece& a = region.boundary[i];
    const BoundaryPiece& b = region.boundary[(i + 1) % n];
    r.boundary_integral += detail::piece_curvature_integral(data, a);
    double ext = detail::signed_angle(data.at(b.start_point()), a.end_velocity(), b.start_velocity());
    r.exterior_angles.push_back(ext);
    r.corner_sum += ext;
  }
  std::tie(r.curvature_integral, r.area) = region_integral(data, region);
  r.residual = std::abs(r.curvature_integral + r.boundary_integral + r.corner_sum - 2.0 * M_PI);
  return r;
}

inline double gauss_bonnet_residual(const SurfaceConnection& data, const RegionSpec& region) {
  return gauss_bonnet(data, region).residual;
}

struct HolonomyReport {
  double angle = 0.0;               // rotation of a transported vector, in (-pi, pi]
  double curvature_integral = 0.0;  // integral of K over the region
  double mismatch = 0.0;            // |angle - integral| modulo 2 pi
  double norm_drift = 0.0;
};

// Transports the initial boundary velocity once around the region.
inline HolonomyReport holonomy(const SurfaceConnection& data, const RegionSpec& region) {
  if (region.boundary.empty()) fail(ErrorCode::OpenBoundary, "region without boundary");
  HolonomyReport r;
  Vec2 w0 = region.boundary.front().start_velocity();
  Vec2 w = w0;
  for (const BoundaryPiece& piece : region.boundary) {
    TransportResult t = piece.curve ? parallel_transport(data, *piece.curve, w) : parallel_transport(data, *piece.trace, w);
    w = t.vector;
    r.norm_drift = std::max(r.norm_drift, t.norm_drift);
  }
  r.angle = detail::signed_angle(data.at(region.boundary.front().start_point()), w0, w);
  r.curvature_integral = region_integral(data, region).first;
  r.mismatch = std::abs(detail::wrap_angle(r.angle - r.curvature_integral));
  return r;
}

// ---- normal deformations ----

struct DeformationRate {
  double formula = 0.0;            // first-variation formula
  double finite_difference = 0.0;  // from the deformed curves
  double residual = 0.0;
};

struct DeformationOptions {
  double eps = 1e-3;         // deformation step
  double delta_frac = 2e-3;  // curve-parameter step as a fraction of t1 - t0
  int exp_steps = 16;
};

// Rate of change of the geodesic curvature at c(t) when c is pushed along
// l(t) J X (X the unit tangent), computed from
//   l (K + kappa (kappa + tau_X)) + X.X.l - X.(l tau_Y)
// and by differentiating the curvature of the actual deformation
// c_e(t) = exp_{c(t)}(e l(t) J X(t)).
inline DeformationRate deformation_rate_check(const SurfaceConnection& data, const ParametrizedCurve& c,
                                              const std::function<double(double)>& l, double t,
                                              DeformationOptions opt = {}) {
  double delta = opt.delta_frac * (c.t1 - c.t0);
  auto speed = [&](double s) { return metric_norm(data.at(c.position(s)).metric, c.velocity(s)); };
  DeformationRate out;
  try {
    ConnectionPoint cp = data.at(c.position(t));
    Vec2 X = c.velocity(t) / speed(t);
    double kappa = geodesic_curvature(data, c, t);
    double tau_X = form(cp.metric, cp.torsion, X);
    double K = data.curvature(c.position(t));
    std::function<double(double)> dl_ds = [&](double s) { return detail::fd1(l, s, delta) / speed(s); };
    double XXl = detail::fd1(dl_ds, t, delta) / speed(t);
    std::function<double(double)> l_tau_Y = [&](double s) {
      ConnectionPoint p = data.at(c.position(s));
      Vec2 x = c.velocity(s);
      return l(s) * form(p.metric, p.torsion, p.J * x) / metric_norm(p.metric, x);
    };
    double Xl_tau_Y = detail::fd1(l_tau_Y, t, delta) / speed(t);
    out.formula = l(t) * (K + kappa * (kappa + tau_X)) + XXl - Xl_tau_Y;

    auto deformed = [&](double e, double s) {
      ConnectionPoint p = data.at(c.position(s));
      Vec2 x = c.velocity(s);
      Vec2 w = (p.J * x) * (e * l(s) / metric_norm(p.metric, x));
      return exp_map(data, c.position(s), w, opt.exp_steps);
    };
    auto kappa_e = [&](double e) {
      std::array<Vec2, 5> P;
      for (int k = 0; k < 5; ++k) P[static_cast<std::size_t>(k)] = deformed(e, t + (k - 2) * delta);
      Vec2 v = (P[0] - P[1] * 8.0 + P[3] * 8.0 - P[4]) / (12.0 * delta);
      Vec2 a = (P[0] * -1.0 + P[1] * 16.0 - P[2] * 30.0 + P[3] * 16.0 - P[4]) / (12.0 * delta * delta);
      return curvature_from(data.at(P[2]), v, a);
    };
    double e = opt.eps;
    out.finite_difference = (kappa_e(-2 * e) - 8.0 * kappa_e(-e) + 8.0 * kappa_e(e) - kappa_e(2 * e)) / (12.0 * e);
  } catch (const Error& err) {
    if (err.code() == ErrorCode::PointOutsideChart) fail(ErrorCode::LeftPatch, err.what());
    throw;
  }
  out.residual = std::abs(out.formula - out.finite_difference);
  return out;
}

}  // namespace efimov

#pragma once
// Scalar ODE constructions y'' = (yu)' - (eps + u^2/4) y and the 2x2 spiral
// spectrum behind them.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "efimov/core/error.hpp"
#include "efimov/core/linalg.hpp"
#include "efimov/core/numerics.hpp"

namespace efimov {

// A scalar profile u on [a, b]. With period > 0 it is wrapped into [a, a + period).
struct ScalarProfile {
  std::function<double(double)> f;
  double a = -std::numeric_limits<double>::infinity();
  double b = std::numeric_limits<double>::infinity();
  double period = 0.0;

  double operator()(double s) const {
    if (period > 0.0) {
      s = a + std::fmod(s - a, period);
      if (s < a) s += period;
    } else if (s < a || s > b) {
      fail(ErrorCode::PointOutsideChart, "profile evaluated at s = ", s, " outside [", a, ", ", b, "]");
    }
    return f(s);
  }

  static ScalarProfile constant(double c) {
    return ScalarProfile{[c](double) { return c; }};
  }
};

struct SpiralSpectrum {
  double T = 0.0, Lambda = 0.0, K = 0.0;  // mean matrix (T, Lambda; -K, 0)
  double alpha = 0.0;
  double beta = 0.0;
  bool oscillatory = false;
};

// Roots of X^2 - T X + Lambda K are alpha +- i beta when 4 Lambda K > T^2.
// Otherwise the roots are real, alpha +- beta, and beta is half their gap.
inline SpiralSpectrum spiral_eigenvalues(double T, double Lambda, double K) {
  SpiralSpectrum s{T, Lambda, K, T / 2.0, 0.0, false};
  double disc = Lambda * K - T * T / 4.0;
  s.oscillatory = disc > 0.0;
  s.beta = std::sqrt(std::abs(disc));
  return s;
}

struct EdoSample {
  double s = 0.0;
  double y = 0.0;
  double z = 0.0;
  double dy = 0.0;  // y' = y u + z
};

struct EdoSolution {
  double epsilon = 0.0;
  double step = 0.0;
  double s0 = 0.0;
  double s1 = 0.0;
  double S1 = 0.0;         // pi / sqrt(eps)
  double M0 = 0.0;         // max of |y|, |y'| on [0, s0]
  double lipschitz = 0.0;  // max |y'| on [0, s1]
  double y_max = 0.0;
  bool z_decreasing = true;  // sample-wise, while y > 0
  std::vector<EdoSample> samples;  // s0 and s1 are sample points

  // Hermite interpolation of (y, y') at s in [0, s1].
  std::pair<double, double> eval(double s) const {
    if (samples.empty() || s < samples.front().s || s > samples.back().s)
      fail(ErrorCode::InvalidArgument, "s = ", s, " outside the solution");
    auto it = std::upper_bound(samples.begin(), samples.end(), s, [](double v, const EdoSample& e) { return v < e.s; });
    if (it == samples.end()) return {samples.back().y, samples.back().dy};
    const EdoSample& p = *(it - 1);
    const EdoSample& q = *it;
    double h = q.s - p.s;
    double t = (s - p.s) / h;
    return {hermite(p.y, p.dy, q.y, q.dy, h, t), hermite_derivative(p.y, p.dy, q.y, q.dy, h, t)};
  }
};

// Bound from the decomposition of (1, 4) on the eigenbasis:
// sqrt(1 + (2/eps + 4)^2 / eps) exp(pi / sqrt(eps)) dominates |X| on [0, s0].
inline double edo_envelope(double eps) {
  return std::sqrt(1.0 + (2.0 / eps + 4.0) * (2.0 / eps + 4.0) / eps) * std::exp(M_PI / std::sqrt(eps));
}

namespace detail {

using EdoState = Vec<double, 2>;

struct EdoMarch {
  std::vector<EdoSample> samples;
  double s0 = 0.0;
  double s1 = 0.0;
  bool found_zero = false;
};

// Integrates (y, z)' = (y u + z, -(eps + u^2/4) y) in local time from (y0, z0)
// until y first reaches 0. Crossings of 1 (from above) and 0 are refined by
// bisection on the RK4 sub-step and inserted as samples.
inline EdoMarch edo_march(const std::function<double(double)>& u, double eps, double step, double y0, double z0,
                          double s_max) {
  const double ubound = 1.0 / eps;
  auto uu = [&](double s) {
    double v = u(s);
    if (!std::isfinite(v) || std::abs(v) > ubound * (1.0 + 1e-12))
      fail(ErrorCode::BoundViolated, "|u(", s, ")| = ", std::abs(v), " exceeds 1/eps = ", ubound);
    return v;
  };
  auto rhs = [&](double s, const EdoState& X) {
    double v = uu(s);
    return EdoState{{X[0] * v + X[1], -(eps + v * v / 4.0) * X[0]}};
  };
  auto sample = [&](double s, const EdoState& X, double y_override) {
    double y = std::isnan(y_override) ? X[0] : y_override;
    return EdoSample{s, y, X[1], y * uu(s) + X[1]};
  };
  // Root of y(s + h) - level for h in (0, step], y from one RK4 sub-step.
  auto refine = [&](double s, const EdoState& X, double h_hi, double level) {
    double lo = 0.0, hi = h_hi;
    while (hi - lo > 1e-13) {
      double mid = 0.5 * (lo + hi);
      if (rk4_step(rhs, s, X, mid)[0] > level) lo = mid;
      else hi = mid;
    }
    return hi;
  };

  EdoMarch m;
  EdoState X{{y0, z0}};
  double s = 0.0;
  m.samples.push_back(sample(s, X, NAN));
  bool above = false, returned = false;
  if (m.samples.front().dy <= 0.0) returned = true;  // no rise: s0 = 0
  while (s < s_max) {
    EdoState Xn = rk4_step(rhs, s, X, step);
    if (!returned && above && Xn[0] <= 1.0) {
      double h = refine(s, X, step, 1.0);
      m.s0 = s + h;
      m.samples.push_back(sample(m.s0, rk4_step(rhs, s, X, h), 1.0));
      returned = true;
    }
    if (Xn[0] <= 0.0) {
      double h = refine(s, X, step, 0.0);
      m.s1 = s + h;
      if (!returned) {
        m.s0 = m.s1;
        returned = true;
      }
      m.samples.push_back(sample(m.s1, rk4_step(rhs, s, X, h), 0.0));
      m.found_zero = true;
      return m;
    }
    if (Xn[0] > 1.0) above = true;
    s += step;
    X = Xn;
    m.samples.push_back(sample(s, X, NAN));
  }
  return m;
}

inline EdoSolution finish_edo(EdoMarch&& m, double eps, double step) {
  EdoSolution r;
  r.epsilon = eps;
  r.step = step;
  r.s0 = m.s0;
  r.s1 = m.s1;
  r.S1 = M_PI / std::sqrt(eps);
  r.samples = std::move(m.samples);
  for (std::size_t i = 0; i < r.samples.size(); ++i) {
    const EdoSample& e = r.samples[i];
    if (e.s <= r.s0) r.M0 = std::max({r.M0, std::abs(e.y), std::abs(e.dy)});
    r.lipschitz = std::max(r.lipschitz, std::abs(e.dy));
    r.y_max = std::max(r.y_max, e.y);
    if (i > 0 && r.samples[i - 1].y > 0.0 && !(e.z < r.samples[i - 1].z)) r.z_decreasing = false;
  }
  return r;
}

inline double edo_search_limit(double eps, double step) { return 1.05 * M_PI / std::sqrt(eps) + 10.0 * step; }

}  // namespace detail

// Integrates from (y, z)(0) = (1, 4), so y'(0) = u(0) + 4. s0 is the first
// return of y to 1 and s1 the first zero of y. The zero is searched up to
// 1.05 pi / sqrt(eps) unless search_limit is given; for non-constant u the
// zero can come later than pi / sqrt(eps) (u = -cos s, eps = 1 gives 1.18 pi).
inline EdoSolution solve_prop_edo(const ScalarProfile& u, double eps, double step, double origin = 0.0,
                                  double search_limit = 0.0) {
  if (!(eps > 0.0)) fail(ErrorCode::InvalidArgument, "eps must be positive, got ", eps);
  if (!(step > 0.0)) fail(ErrorCode::InvalidArgument, "step must be positive, got ", step);
  double limit = search_limit > 0.0 ? search_limit : detail::edo_search_limit(eps, step);
  auto m = detail::edo_march([&](double s) { return u(origin + s); }, eps, step, 1.0, 4.0, limit);
  if (!m.found_zero) fail(ErrorCode::NoCrossing, "y has no zero before s = ", limit);
  return detail::finish_edo(std::move(m), eps, step);
}

// Spectrum of the averaged matrix (F, 1; -(eps + Ft^2/4), 0) on [0, s], with
// F the mean of u and Ft the root mean square.
inline SpiralSpectrum mean_spectrum(const ScalarProfile& u, double eps, double s, double origin = 0.0) {
  if (!(s > 0.0)) fail(ErrorCode::InvalidArgument, "averaging window must be positive");
  const GaussRule g = gauss_legendre(16);
  int pieces = std::max(1, static_cast<int>(std::ceil(s / 0.05)));
  double h = s / pieces, m1 = 0.0, m2 = 0.0;
  for (int p = 0; p < pieces; ++p)
    for (std::size_t k = 0; k < g.x.size(); ++k) {
      double v = u(origin + h * (p + 0.5 * (g.x[k] + 1.0)));
      m1 += 0.5 * h * g.w[k] * v;
      m2 += 0.5 * h * g.w[k] * v * v;
    }
  double F = m1 / s, Ft2 = m2 / s;
  return spiral_eigenvalues(F, 1.0, eps + Ft2 / 4.0);
}

// Piecewise solution of y'' >= (yu)' - (eps + u^2/4) y built from segments of
// solve_prop_edo, each starting with y = 1, y' = u + 4 where the previous one
// returned to 1, closed by one segment on each side running down to y = 0.
struct Edo7Solution {
  struct Piece {
    std::vector<double> x, y, dy;  // increasing x
  };

  double epsilon = 0.0;
  double N1 = 0.0;
  double S1 = 0.0;
  double M1 = 0.0;  // M'_1 = 2 S1
  std::vector<double> junctions;  // x_{-1}, x_0 = -N1, ..., x_{N+1}
  std::vector<Piece> pieces;       // pieces[k] spans [junctions[k], junctions[k+1]]
  double lipschitz = 0.0;
  double floor = 0.0;  // min y over the samples in [-N1, N1]
  double y_max = 0.0;
  bool support_ok = false;   // support within [-N1 - M1, N1 + M1]
  bool floor_ok = false;     // y >= 1 on [-N1, N1]
  bool lipschitz_ok = false; // |y'| <= M1
  bool range_ok = false;     // 0 <= y <= M1

  double support_lo() const { return junctions.front(); }
  double support_hi() const { return junctions.back(); }

  // y and y' at x; both vanish outside the support. At a junction the
  // right-hand piece wins.
  std::pair<double, double> eval(double x) const {
    if (x < support_lo() || x > support_hi()) return {0.0, 0.0};
    std::size_t k = static_cast<std::size_t>(std::upper_bound(junctions.begin(), junctions.end(), x) - junctions.begin());
    k = std::min(k == 0 ? 0 : k - 1, pieces.size() - 1);
    const Piece& p = pieces[k];
    auto it = std::upper_bound(p.x.begin(), p.x.end(), x);
    std::size_t j = static_cast<std::size_t>(it - p.x.begin());
    if (j == 0) return {p.y.front(), p.dy.front()};
    if (j >= p.x.size()) return {p.y.back(), p.dy.back()};
    double h = p.x[j] - p.x[j - 1];
    double t = (x - p.x[j - 1]) / h;
    return {hermite(p.y[j - 1], p.dy[j - 1], p.y[j], p.dy[j], h, t),
            hermite_derivative(p.y[j - 1], p.dy[j - 1], p.y[j], p.dy[j], h, t)};
  }
};

inline Edo7Solution construct_edo7(const ScalarProfile& u, double eps, double N1, double step,
                                   double search_limit = 0.0) {
  if (!(N1 > 0.0)) fail(ErrorCode::InvalidArgument, "N1 must be positive, got ", N1);
  if (!(eps > 0.0)) fail(ErrorCode::InvalidArgument, "eps must be positive, got ", eps);
  if (!(step > 0.0)) fail(ErrorCode::InvalidArgument, "step must be positive, got ", step);
  Edo7Solution r;
  r.epsilon = eps;
  r.N1 = N1;
  r.S1 = M_PI / std::sqrt(eps);
  r.M1 = 2.0 * r.S1;
  const double limit = search_limit > 0.0 ? search_limit : detail::edo_search_limit(eps, step);

  // Left closing piece, integrated backwards from x0 = -N1. In reversed time
  // r = x0 - x the equation keeps its form with u replaced by -u(x0 - r).
  // The slope y'(x0-) = min(0, u(x0) + 4) keeps the jump of y' at x0 >= 0.
  const double x0 = -N1;
  const double u0 = u(x0);
  const double left_slope = std::min(0.0, u0 + 4.0);
  auto back = detail::edo_march([&](double s) { return -u(x0 - s); }, eps, step, 1.0, -left_slope + u0, limit);
  if (!back.found_zero) fail(ErrorCode::NoCrossing, "left piece has no zero before ", limit);
  Edo7Solution::Piece left;
  for (auto it = back.samples.rbegin(); it != back.samples.rend(); ++it) {
    left.x.push_back(x0 - it->s);
    left.y.push_back(it->y);
    left.dy.push_back(-it->dy);
  }
  left.x.back() = x0;
  r.junctions.push_back(x0 - back.s1);
  r.junctions.push_back(x0);
  r.pieces.push_back(std::move(left));

  auto append = [&](const EdoSolution& seg, double x, double until) {
    Edo7Solution::Piece p;
    for (const EdoSample& e : seg.samples) {
      if (e.s > until) break;
      p.x.push_back(x + e.s);
      p.y.push_back(e.y);
      p.dy.push_back(e.dy);
    }
    r.pieces.push_back(std::move(p));
  };

  double x = x0;
  do {
    EdoSolution seg = solve_prop_edo(u, eps, step, x, limit);
    if (!(seg.s0 > 0.0)) fail(ErrorCode::NoCrossing, "segment from x = ", x, " does not return to 1");
    append(seg, x, seg.s0);
    x += seg.s0;
    r.pieces.back().x.back() = x;
    r.junctions.push_back(x);
  } while (x <= N1);
  EdoSolution last = solve_prop_edo(u, eps, step, x, limit);
  append(last, x, last.s1);
  r.pieces.back().x.back() = x + last.s1;
  r.junctions.push_back(x + last.s1);

  r.floor = std::numeric_limits<double>::infinity();
  double lo = std::numeric_limits<double>::infinity();
  for (const auto& p : r.pieces)
    for (std::size_t i = 0; i < p.x.size(); ++i) {
      r.lipschitz = std::max(r.lipschitz, std::abs(p.dy[i]));
      r.y_max = std::max(r.y_max, p.y[i]);
      lo = std::min(lo, p.y[i]);
      if (p.x[i] >= -N1 && p.x[i] <= N1) r.floor = std::min(r.floor, p.y[i]);
    }
  r.support_ok = r.support_lo() >= -N1 - r.M1 && r.support_hi() <= N1 + r.M1;
  r.floor_ok = r.floor >= 1.0;
  r.lipschitz_ok = r.lipschitz <= r.M1;
  r.range_ok = lo >= 0.0 && r.y_max <= r.M1;
  return r;
}

// Cubic B-spline bump of unit mass centered at c, supported on [c - w/2, c + w/2].
struct Mollifier {
  double center = 0.0;
  double width = 1.0;

  double scale() const { return width / 4.0; }
  double lo() const { return center - width / 2.0; }
  double hi() const { return center + width / 2.0; }

  // Returns phi, phi', phi'' at x.
  std::array<double, 3> operator()(double x) const {
    double a = scale();
    double t = (x - center) / a;
    double at = std::abs(t), sg = t < 0 ? -1.0 : 1.0;
    double b = 0.0, db = 0.0, ddb = 0.0;
    if (at < 1.0) {
      b = 2.0 / 3.0 - t * t + 0.5 * at * at * at;
      db = -2.0 * t + 1.5 * sg * at * at;
      ddb = -2.0 + 3.0 * at;
    } else if (at < 2.0) {
      double m = 2.0 - at;
      b = m * m * m / 6.0;
      db = -0.5 * sg * m * m;
      ddb = m;
    }
    return {b / a, db / (a * a), ddb / (a * a * a)};
  }
};

// `count` bumps without randomness: one centered on each junction, the rest
// evenly spread over the support. Widths shrink with the count.
inline std::vector<Mollifier> mollifier_family(const Edo7Solution& sol, int count) {
  if (count < 1) fail(ErrorCode::InvalidArgument, "need at least one mollifier");
  const double lo = sol.support_lo(), hi = sol.support_hi(), len = hi - lo;
  const double w = std::max(4e-3, 2.0 * len / count);
  std::vector<Mollifier> out;
  for (double x : sol.junctions) {
    if (static_cast<int>(out.size()) == count) break;
    out.push_back({x, std::min(w, 0.25)});
  }
  int rest = count - static_cast<int>(out.size());
  for (int i = 0; i < rest; ++i) out.push_back({lo + len * (i + 0.5) / rest, w});
  return out;
}

// int y (phi'' + (eps + u^2/4) phi + u phi') dx, the pairing of the weak form
// of y'' - (yu)' + (eps + u^2/4) y >= 0 with a test function. Breakpoints are
// the sample grid, the junctions and the spline knots.
inline double weak_residual(const Edo7Solution& sol, const ScalarProfile& u, const Mollifier& m) {
  double lo = std::max(m.lo(), sol.support_lo()), hi = std::min(m.hi(), sol.support_hi());
  if (!(hi > lo)) return 0.0;
  std::vector<double> cuts{lo, hi};
  for (int k = -1; k <= 1; ++k) cuts.push_back(m.center + k * m.scale());
  for (const auto& p : sol.pieces)
    for (double x : p.x) cuts.push_back(x);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::remove_if(cuts.begin(), cuts.end(), [&](double x) { return x < lo || x > hi; }), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  static const GaussRule g = gauss_legendre(4);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    double a = cuts[i], b = cuts[i + 1];
    if (b - a < 1e-15) continue;
    for (std::size_t k = 0; k < g.x.size(); ++k) {
      double x = 0.5 * (a + b) + 0.5 * (b - a) * g.x[k];
      auto [phi, dphi, ddphi] = m(x);
      double v = u(x);
      double y = sol.eval(x).first;
      total += 0.5 * (b - a) * g.w[k] * y * (ddphi + (sol.epsilon + v * v / 4.0) * phi + v * dphi);
    }
  }
  return total;
}

}  // namespace efimov

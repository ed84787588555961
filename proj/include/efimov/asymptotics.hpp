#pragma once
// Asymptotic directions of an immersed patch seen through (III, dual
// connection): the frame B~ U = k J U, B~ V = -k J V with B~ = B^-1, the
// covariant rates of U and V, traces of their integral curves, and the
// coordinate net built from them.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "efimov/connection.hpp"
#include "efimov/curves.hpp"

namespace efimov {

struct AsymptoticFrame {
  Vec2 q;
  Vec2 U, V;  // III-unit, chart components
  double theta = 0.0;  // III-angle from U to V, in (0, pi)
  double k = 0.0;      // |det B~|^(1/2)
  Mat2 metric;         // III
  Mat2 J;
  Mat2 Btilde;
};

enum class Direction { U, V };

namespace detail {

// Kernel of a singular 2x2 matrix, from its larger row.
inline Vec2 kernel2(const Mat2& m) {
  Vec2 r0{{m(0, 0), m(0, 1)}}, r1{{m(1, 0), m(1, 1)}};
  Vec2 r = norm(r0) >= norm(r1) ? r0 : r1;
  return Vec2{{-r[1], r[0]}};
}

inline Vec2 orient_default(const Vec2& x) {
  bool flip = std::abs(x[0]) > 1e-12 * norm(x) ? x[0] < 0.0 : x[1] < 0.0;
  return flip ? -x : x;
}

}  // namespace detail

// U is oriented by `reference` (positive III product) when given, else by a
// positive first chart component (second on ties). V then has
// III(J U, V) > 0, so theta is in (0, pi).
inline AsymptoticFrame asymptotic_frame(const SurfaceConnection& data, const Vec2& q,
                                        std::optional<Vec2> reference = std::nullopt) {
  if (!data.is_immersion()) fail(ErrorCode::ModeUnsupported, "asymptotic directions need an immersed patch");
  ImmersionJet j = data.immersion_jet(q);
  AsymptoticFrame f;
  f.q = q;
  f.metric = j.III;
  f.J = rotation_matrix(j.III);
  f.Btilde = inverse(j.B);
  double d = det(f.Btilde);
  if (!(d < 0.0)) fail(ErrorCode::NonHyperbolicPoint, "det B~ = ", d, " at ", format_point(q));
  f.k = std::sqrt(-d);
  // III-orthonormal frame (e1, J e1) and the matrix of B~ in it.
  Vec2 e1{{1.0 / std::sqrt(j.III(0, 0)), 0.0}};
  Vec2 e2 = f.J * e1;
  Mat2 E;
  E(0, 0) = e1[0];
  E(1, 0) = e1[1];
  E(0, 1) = e2[0];
  E(1, 1) = e2[1];
  Mat2 S = inverse(E) * f.Btilde * E;
  Mat2 J0;
  J0(0, 1) = -1.0;
  J0(1, 0) = 1.0;
  Vec2 u = detail::kernel2(S - J0 * f.k);
  Vec2 v = detail::kernel2(S + J0 * f.k);
  f.U = E * (u / norm(u));
  f.V = E * (v / norm(v));
  if (reference)
    f.U = form(j.III, f.U, *reference) < 0.0 ? -f.U : f.U;
  else
    f.U = detail::orient_default(f.U);
  if (form(j.III, f.J * f.U, f.V) < 0.0) f.V = -f.V;
  f.theta = std::acos(std::clamp(form(j.III, f.U, f.V), -1.0, 1.0));
  return f;
}

inline const Vec2& frame_vector(const AsymptoticFrame& f, Direction which) { return which == Direction::U ? f.U : f.V; }

struct FrameResiduals {
  double eigen_U = 0.0;  // |B~ U - k J U|
  double eigen_V = 0.0;  // |B~ V + k J V|
  double unit = 0.0;     // max | |U| - 1 |, | |V| - 1 |
  double k_det = 0.0;    // |k - |det B~|^(1/2)|
  double norm_I = 0.0;   // max | |U|_I - k |, | |V|_I - k |
};

inline FrameResiduals frame_residuals(const SurfaceConnection& data, const AsymptoticFrame& f) {
  FrameResiduals r;
  r.eigen_U = metric_norm(f.metric, f.Btilde * f.U - (f.J * f.U) * f.k);
  r.eigen_V = metric_norm(f.metric, f.Btilde * f.V + (f.J * f.V) * f.k);
  r.unit = std::max(std::abs(metric_norm(f.metric, f.U) - 1.0), std::abs(metric_norm(f.metric, f.V) - 1.0));
  r.k_det = std::abs(f.k - std::sqrt(std::abs(det(f.Btilde))));
  Mat2 I = data.immersion_jet(f.q).I;
  r.norm_I = std::max(std::abs(metric_norm(I, f.U) - f.k), std::abs(metric_norm(I, f.V) - f.k));
  return r;
}

struct CovariantRates {
  Vec2 nabla_V_U, nabla_U_V;  // measured
  Vec2 rhs_V_U, rhs_U_V;      // frame equations with kappa = -ln k
  double residual_V_U = 0.0;
  double residual_U_V = 0.0;
  // Same equations with the opposite sign on the derivative of kappa,
  // i.e. kappa = ln k. This is the version d(B~) = tau-twisted Codazzi
  // actually implies; the two agree wherever k is stationary.
  Vec2 rhs_V_U_ln_k, rhs_U_V_ln_k;
  double residual_V_U_ln_k = 0.0;
  double residual_U_V_ln_k = 0.0;
  double sin_theta = 0.0;
};

// Compares nabla_V U and nabla_U V with
//   -sin(theta)/2 (U.kappa + III(tau, J U)) J U,
//    sin(theta)/2 (V.kappa + III(tau, J V)) J V,   kappa = -ln k,
// differentiating the frame by 5-point central differences with step h.
inline CovariantRates covariant_rate_check(const SurfaceConnection& data, const Vec2& q, double h = 1e-3) {
  AsymptoticFrame f = asymptotic_frame(data, q);
  ConnectionPoint cp = data.at(q);
  std::array<Vec2, 2> dU, dV;
  Vec2 dlnk;
  for (int i = 0; i < 2; ++i) {
    Vec2 e{};
    e[i] = 1.0;
    std::array<AsymptoticFrame, 4> g;
    const double off[4] = {-2, -1, 1, 2};
    for (int m = 0; m < 4; ++m) g[static_cast<std::size_t>(m)] = asymptotic_frame(data, q + e * (off[m] * h), f.U);
    dU[static_cast<std::size_t>(i)] = (g[0].U - g[1].U * 8.0 + g[2].U * 8.0 - g[3].U) / (12.0 * h);
    dV[static_cast<std::size_t>(i)] = (g[0].V - g[1].V * 8.0 + g[2].V * 8.0 - g[3].V) / (12.0 * h);
    dlnk[i] = (std::log(g[0].k) - 8.0 * std::log(g[1].k) + 8.0 * std::log(g[2].k) - std::log(g[3].k)) / (12.0 * h);
  }
  CovariantRates r;
  r.nabla_V_U = dU[0] * f.V[0] + dU[1] * f.V[1] + contract(cp.gamma, f.V, f.U);
  r.nabla_U_V = dV[0] * f.U[0] + dV[1] * f.U[1] + contract(cp.gamma, f.U, f.V);
  r.sin_theta = std::sin(f.theta);
  Vec2 JU = f.J * f.U, JV = f.J * f.V;
  double tu = form(f.metric, cp.torsion, JU), tv = form(f.metric, cp.torsion, JV);
  auto rhs = [&](const Vec2& dkappa) {
    return std::pair{JU * (-0.5 * r.sin_theta * (dot(dkappa, f.U) + tu)),
                     JV * (0.5 * r.sin_theta * (dot(dkappa, f.V) + tv))};
  };
  std::tie(r.rhs_V_U, r.rhs_U_V) = rhs(-dlnk);
  std::tie(r.rhs_V_U_ln_k, r.rhs_U_V_ln_k) = rhs(dlnk);
  r.residual_V_U = metric_norm(f.metric, r.nabla_V_U - r.rhs_V_U);
  r.residual_U_V = metric_norm(f.metric, r.nabla_U_V - r.rhs_U_V);
  r.residual_V_U_ln_k = metric_norm(f.metric, r.nabla_V_U - r.rhs_V_U_ln_k);
  r.residual_U_V_ln_k = metric_norm(f.metric, r.nabla_U_V - r.rhs_U_V_ln_k);
  return r;
}

// sup over the samples of |nabla_U V| / sin(theta) and |nabla_V U| / sin(theta).
inline double measure_tau1(const SurfaceConnection& data, const std::vector<Vec2>& samples) {
  double t = 0.0;
  for (const Vec2& q : samples) {
    CovariantRates r = covariant_rate_check(data, q);
    Mat2 III = data.at(q).metric;
    t = std::max({t, metric_norm(III, r.nabla_U_V) / r.sin_theta, metric_norm(III, r.nabla_V_U) / r.sin_theta});
  }
  return t;
}

struct AsymptoticSample {
  double s = 0.0;
  Vec2 point;
  double theta = 0.0;
  AsymptoticFrame frame;
  double delta_running = 0.0;
  double sigma_running = 0.0;
  double defect_running = 0.0;
};

struct AsymptoticTrace {
  CurveTrace curve;
  std::vector<AsymptoticSample> samples;
  double delta = 0.0;         // pi + inf theta - sup theta
  double sigma = 0.0;         // integral of sin(theta) ds, trapezoid
  double quasi_defect = 0.0;  // max angle between c' and the transport of c'(0)
};

// Angle history between the velocity of a trace and the parallel transport
// of its initial velocity.
inline std::vector<double> quasi_geodesic_angles(const SurfaceConnection& data, const CurveTrace& trace) {
  TransportResult t = parallel_transport(data, trace, trace.front().velocity);
  std::vector<double> a(trace.samples.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    ConnectionPoint cp = data.at(trace.samples[i].point);
    a[i] = std::abs(detail::signed_angle(cp, t.history[i], trace.samples[i].velocity));
  }
  return a;
}

inline double quasi_geodesic_defect(const SurfaceConnection& data, const CurveTrace& trace) {
  auto a = quasi_geodesic_angles(data, trace);
  return *std::max_element(a.begin(), a.end());
}

// Integral curve of U (or V) at unit III speed. The sign of the field is
// carried along by continuity from the starting frame.
inline AsymptoticTrace trace_asymptotic(const SurfaceConnection& data, const Vec2& q, Direction which, double L,
                                        double step) {
  if (!data.is_immersion()) fail(ErrorCode::ModeUnsupported, "asymptotic curves need an immersed patch");
  AsymptoticFrame f0 = asymptotic_frame(data, q);
  Vec2 ref = frame_vector(f0, which);
  std::vector<AsymptoticFrame> frames;
  auto field = [&](const Vec2& x) {
    AsymptoticFrame f = asymptotic_frame(data, x);
    Vec2 w = frame_vector(f, which);
    return form(f.metric, w, ref) < 0.0 ? -w : w;
  };
  auto on_step = [&](const CurveSample& smp) {
    ref = smp.velocity;
    frames.push_back(asymptotic_frame(data, smp.point, which == Direction::U ? smp.velocity : std::optional<Vec2>{}));
  };
  AsymptoticTrace out;
  out.curve = integrate_flow(q, L, step, field, on_step);
  std::vector<double> defect = quasi_geodesic_angles(data, out.curve);
  double lo = std::numeric_limits<double>::infinity(), hi = -lo, sigma = 0.0, worst = 0.0;
  for (std::size_t i = 0; i < out.curve.samples.size(); ++i) {
    const CurveSample& cs = out.curve.samples[i];
    AsymptoticSample a;
    a.s = cs.s;
    a.point = cs.point;
    a.frame = frames[i];
    a.theta = frames[i].theta;
    lo = std::min(lo, a.theta);
    hi = std::max(hi, a.theta);
    if (i > 0) sigma += 0.5 * (cs.s - out.samples.back().s) * (std::sin(a.theta) + std::sin(out.samples.back().theta));
    worst = std::max(worst, defect[i]);
    a.delta_running = M_PI + lo - hi;
    a.sigma_running = sigma;
    a.defect_running = worst;
    out.samples.push_back(a);
  }
  out.delta = M_PI + lo - hi;
  out.sigma = sigma;
  out.quasi_defect = worst;
  return out;
}

struct NetReport {
  int n_u = 0, n_v = 0;
  double L_u = 0.0, L_v = 0.0;
  std::vector<std::vector<Vec2>> points;  // [i][j]: g_{v_j}(u_i)
  std::vector<std::vector<double>> alpha, beta;
  double sup_du_alpha = 0.0;  // sup |d_u alpha| / (alpha beta)
  double sup_dv_beta = 0.0;   // sup |d_v beta| / (alpha beta)
  double sup_dL_dv = 0.0;     // sup d/dv L(g_v)
  double dL_bound = 0.0;      // sup of (tau0 + 2 tau1) exp((tau0 + 2 tau1) L) L
  double tau0 = 0.0, tau1 = 0.0;
  double bound = 0.0;  // tau0 + 2 tau1
  bool alpha_ok = true, beta_ok = true, length_ok = true;
};

namespace detail {

// Derivative along a uniform grid: central inside, second-order one-sided at the ends.
inline double grid_derivative(const std::vector<double>& f, std::size_t i, double h) {
  std::size_t n = f.size();
  if (n < 3) return n == 2 ? (f[1] - f[0]) / h : 0.0;
  if (i == 0) return (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
  if (i + 1 == n) return (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h);
  return (f[i + 1] - f[i - 1]) / (2.0 * h);
}

// Solves a(sa) = b(sb) by Newton's method from the given guesses.
inline std::pair<double, double> intersect(const CurveTrace& a, const CurveTrace& b, double sa, double sb) {
  for (int it = 0; it < 50; ++it) {
    auto [pa, va] = trace_eval(a, sa);
    auto [pb, vb] = trace_eval(b, sb);
    Vec2 F = pa - pb;
    if (norm(F) < 1e-14) break;
    Mat2 Jm;
    Jm(0, 0) = va[0];
    Jm(1, 0) = va[1];
    Jm(0, 1) = -vb[0];
    Jm(1, 1) = -vb[1];
    if (std::abs(det(Jm)) < 1e-14) fail(ErrorCode::NonHyperbolicPoint, "asymptotic curves are tangent");
    Vec2 d = inverse(Jm) * F;
    sa -= d[0];
    sb -= d[1];
    if (sa < 0.0 || sb < 0.0 || sa > a.length || sb > b.length)
      fail(ErrorCode::LeftPatch, "net intersection outside the traced curves");
  }
  return {sa, sb};
}

}  // namespace detail

// Asymptotic net: g(u) the U-curve from q, h(v) the V-curve from q, and
// g_v(u) the meeting point of the V-curve from g(u) with the U-curve from
// h(v). alpha = d_v (arclength along V), beta = d_u (arclength along U).
inline NetReport net_expansion_check(const SurfaceConnection& data, const Vec2& q, double L_u, double L_v, int n_u,
                                     int n_v, double step) {
  if (L_u < 0.0 || L_v < 0.0 || n_u < 1 || n_v < 1) fail(ErrorCode::InvalidArgument, "bad net request");
  NetReport r;
  r.L_u = L_u;
  r.L_v = L_v;
  r.n_u = L_u > 0.0 ? n_u : 0;
  r.n_v = L_v > 0.0 ? n_v : 0;
  auto check = [](const AsymptoticTrace& t) {
    if (!t.curve.complete()) fail(ErrorCode::LeftPatch, t.curve.message);
    return t.curve;
  };
  const double extra = 1.5;
  CurveTrace g = check(trace_asymptotic(data, q, Direction::U, std::max(L_u, step), step));
  CurveTrace h = check(trace_asymptotic(data, q, Direction::V, std::max(L_v, step), step));
  double du = r.n_u ? L_u / r.n_u : 0.0, dv = r.n_v ? L_v / r.n_v : 0.0;
  std::vector<CurveTrace> vcurves, ucurves;
  for (int i = 0; i <= r.n_u; ++i) {
    Vec2 p = trace_eval(g, i * du).first;
    vcurves.push_back(i == 0 ? h : check(trace_asymptotic(data, p, Direction::V, extra * L_v + step, step)));
  }
  for (int j = 0; j <= r.n_v; ++j) {
    Vec2 p = trace_eval(h, j * dv).first;
    ucurves.push_back(j == 0 ? g : check(trace_asymptotic(data, p, Direction::U, extra * L_u + step, step)));
  }
  // sigma[i][j]: arclength along the V-curve from g(u_i); rho[i][j]: along the U-curve from h(v_j).
  std::vector<std::vector<double>> sigma(r.n_u + 1, std::vector<double>(r.n_v + 1));
  auto rho = sigma;
  r.points.assign(r.n_u + 1, std::vector<Vec2>(r.n_v + 1));
  for (int i = 0; i <= r.n_u; ++i)
    for (int j = 0; j <= r.n_v; ++j) {
      if (i == 0 || j == 0) {
        sigma[i][j] = j * dv;
        rho[i][j] = i * du;
      } else {
        std::tie(sigma[i][j], rho[i][j]) =
            detail::intersect(vcurves[i], ucurves[j], sigma[i][j - 1] + dv, rho[i - 1][j] + du);
      }
      r.points[i][j] = trace_eval(vcurves[i], sigma[i][j]).first;
    }
  // alpha(0, v) = 1 and beta(u, 0) = 1 hold by construction.
  r.alpha.assign(r.n_u + 1, std::vector<double>(r.n_v + 1, 1.0));
  r.beta = r.alpha;
  for (int i = 1; i <= r.n_u; ++i)
    for (int j = 0; j <= r.n_v && r.n_v > 0; ++j) r.alpha[i][j] = detail::grid_derivative(sigma[i], j, dv);
  for (int j = 1; j <= r.n_v; ++j) {
    std::vector<double> col(r.n_u + 1);
    for (int i = 0; i <= r.n_u; ++i) col[i] = rho[i][j];
    for (int i = 0; i <= r.n_u && r.n_u > 0; ++i) r.beta[i][j] = detail::grid_derivative(col, i, du);
  }
  // Measured constants over the net.
  std::vector<Vec2> pts;
  for (const auto& row : r.points)
    for (const Vec2& p : row) {
      pts.push_back(p);
      r.tau0 = std::max(r.tau0, torsion_norm(data.at(p)));
    }
  r.tau1 = measure_tau1(data, pts);
  r.bound = r.tau0 + 2.0 * r.tau1;
  if (r.n_u == 0 || r.n_v == 0) return r;
  for (int i = 0; i <= r.n_u; ++i)
    for (int j = 0; j <= r.n_v; ++j) {
      std::vector<double> arow(r.n_u + 1);
      for (int m = 0; m <= r.n_u; ++m) arow[m] = r.alpha[m][j];
      double ab = r.alpha[i][j] * r.beta[i][j];
      r.sup_du_alpha = std::max(r.sup_du_alpha, std::abs(detail::grid_derivative(arow, i, du)) / ab);
      r.sup_dv_beta = std::max(r.sup_dv_beta, std::abs(detail::grid_derivative(r.beta[i], j, dv)) / ab);
    }
  std::vector<double> length(r.n_v + 1);
  for (int j = 0; j <= r.n_v; ++j) length[j] = rho[r.n_u][j];
  for (int j = 0; j <= r.n_v; ++j) {
    r.sup_dL_dv = std::max(r.sup_dL_dv, detail::grid_derivative(length, j, dv));
    r.dL_bound = std::max(r.dL_bound, r.bound * std::exp(r.bound * length[j]) * length[j]);
  }
  return r;
}

// Pass flags with an absolute tolerance on the finite-difference ratios.
inline void judge(NetReport& r, double tol) {
  r.alpha_ok = r.sup_du_alpha <= r.bound + tol;
  r.beta_ok = r.sup_dv_beta <= r.bound + tol;
  r.length_ok = r.sup_dL_dv <= r.dL_bound + tol;
}

}  // namespace efimov

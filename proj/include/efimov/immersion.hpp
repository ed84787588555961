#pragma once
// Immersed surface patches: fundamental forms, shape operator, and the
// Gauss and Codazzi equations.
//
// The shape operator is B x = nabla^M_x N, with N the unit normal making
// (d_u phi, d_v phi, orientation * N) positively oriented in the chart.

#include <array>
#include <cmath>
#include <string>

#include "efimov/ambient.hpp"
#include "efimov/core/field.hpp"

namespace efimov {

struct SurfacePatch {
  SmoothField<2, Vec3> map;
  int orientation = 1;

  template <class F>
  static SurfacePatch from_functor(std::string name, Box2 box, F f, int orientation = 1) {
    return SurfacePatch{SmoothField<2, Vec3>::from_functor<3>(std::move(name), box, f), orientation};
  }

  const std::string& name() const { return map.name(); }
  const Box2& box() const { return map.box(); }
  SurfacePatch flipped() const { return SurfacePatch{map, -orientation}; }
};

struct FundamentalData {
  Vec2 q;
  Vec3 point;
  std::array<Vec3, 2> tangent;
  Vec3 normal;
  Mat2 I, II, III;
  Mat2 B;  // B(b, a) = component b of B applied to d_a
  double K_e = 0.0;
  double K_I = 0.0;
  double K_ambient = 0.0;  // ambient sectional curvature of the tangent plane
};

// Fundamental data plus the first parameter derivatives needed by the
// dual connection.
struct ImmersionJet : FundamentalData {
  Mat3 g;
  std::array<Mat2, 2> dI, dB, dIII;
  ChristoffelSymbols<double, 2> gamma_I;
  ChristoffelSymbols<double, 2> gamma_dual;  // coefficients of B^-1 nabla (B .)
  RiemannTensor<3> ambient_R;
  Vec2 codazzi_lhs;  // (d^nabla B)(d_u, d_v)
  Vec2 codazzi_rhs;  // tangential part of R(d_u, d_v) N
};

inline ImmersionJet immersion_jet(const SurfacePatch& patch, const MetricField& metric, const Vec2& q) {
  using A1 = D1<2>;
  using A2 = D2<2>;
  const Jet<Vec3, 2> pj = patch.map.jet(q, 3);
  const Vec3 p = pj.value;
  const MetricJet mj = metric_jet(metric, p, 2);

  std::array<Vec<A2, 3>, 2> X;
  Vec<A2, 3> delta;
  for (int i = 0; i < 3; ++i) {
    for (int a = 0; a < 2; ++a) {
      std::array<std::array<double, 2>, 2> h{};
      for (int b = 0; b < 2; ++b)
        for (int c = 0; c < 2; ++c) h[b][c] = pj.ddd[a][b][c][i];
      X[a][i] = seed2<2>(pj.d[a][i], {pj.dd[a][0][i], pj.dd[a][1][i]}, h);
    }
    std::array<std::array<double, 2>, 2> h{};
    for (int b = 0; b < 2; ++b)
      for (int c = 0; c < 2; ++c) h[b][c] = pj.dd[b][c][i];
    delta[i] = seed2<2>(0.0, {pj.d[0][i], pj.d[1][i]}, h);
  }

  // Metric along the surface to second order, and its chart derivatives to first order.
  Mat<A2, 3> g;
  std::array<Mat<A1, 3>, 3> dg;
  for (int e = 0; e < 9; ++e) {
    A2 s(mj.value[e]);
    for (int k = 0; k < 3; ++k) {
      s += mj.d[k][e] * delta[k];
      for (int l = 0; l < 3; ++l) s += (0.5 * mj.dd[k][l][e]) * (delta[k] * delta[l]);
    }
    g[e] = s;
    for (int k = 0; k < 3; ++k) {
      std::array<double, 2> grad{};
      for (int a = 0; a < 2; ++a)
        for (int l = 0; l < 3; ++l) grad[a] += mj.dd[k][l][e] * pj.d[a][l];
      dg[k][e] = seed1<2>(mj.d[k][e], grad);
    }
  }

  Mat<A2, 2> I;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) I(a, b) = form(g, X[a], X[b]);
  const double detI = det(values(I));
  const double scale = ad::value_of(I(0, 0)) * ad::value_of(I(1, 1));
  if (!(detI > 1e-12 * scale) || !(scale > 0.0))
    fail(ErrorCode::DegenerateImmersion, patch.name(), " at ", format_point(q));

  Vec<A2, 3> nu = cross(X[0], X[1]);
  Vec<A2, 3> n = inverse(g) * nu;
  A2 nn = dot(nu, n);
  Vec<A2, 3> N = n * (static_cast<double>(patch.orientation) / sqrt(nn));

  Mat<A1, 3> g1 = lower_mat(g);
  Vec<A1, 3> N1 = lower_vec(N);
  std::array<Vec<A1, 3>, 2> X1 = {lower_vec(X[0]), lower_vec(X[1])};
  ChristoffelSymbols<A1, 3> GM = christoffel_symbols<A1, 3>(g1, dg);
  Mat<A1, 2> I1 = lower_mat(I);
  Mat<A1, 2> Ii = inverse(I1);
  Mat<A1, 2> II, B;
  std::array<Vec<A1, 3>, 2> W;
  for (int a = 0; a < 2; ++a) W[a] = diff_vec(N, a) + contract(GM, X1[a], N1);
  for (int a = 0; a < 2; ++a)
    for (int c = 0; c < 2; ++c) II(a, c) = form(g1, W[a], X1[c]);
  for (int b = 0; b < 2; ++b)
    for (int a = 0; a < 2; ++a) B(b, a) = Ii(b, 0) * II(a, 0) + Ii(b, 1) * II(a, 1);
  Mat<A1, 2> III = transpose(B) * I1 * B;

  ChristoffelSymbols<A1, 2> GI = christoffel_symbols<A1, 2>(I1, {diff_mat(I, 0), diff_mat(I, 1)});
  RiemannTensor<2> RI = riemann_from_christoffel<2>(values(I1), GI);

  ImmersionJet j;
  j.q = q;
  j.point = p;
  j.g = mj.value;
  for (int a = 0; a < 2; ++a) j.tangent[a] = values(X1[a]);
  j.normal = values(N1);
  j.I = values(I1);
  j.II = values(II);
  j.III = values(III);
  j.B = values(B);
  for (int a = 0; a < 2; ++a) {
    j.dI[a] = lower_mat(diff_mat(I, a));
    j.dB[a] = diff_mat(B, a);
    j.dIII[a] = diff_mat(III, a);
  }
  for (int k = 0; k < 2; ++k) j.gamma_I[k] = values(GI[k]);
  j.K_e = det(j.B);
  j.K_I = RI(0, 1, 1, 0) / detI;
  j.ambient_R = riemann_from_jet<3>(mj);
  j.K_ambient = sectional_from(j.ambient_R, j.g, j.tangent[0], j.tangent[1]);

  // Dual connection coefficients, defined when B is invertible.
  if (std::abs(j.K_e) > 0.0) {
    Mat2 Bi = inverse(j.B);
    for (int e = 0; e < 2; ++e)
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
          double s = 0.0;
          for (int d = 0; d < 2; ++d) {
            double t = j.dB[a](d, b);
            for (int c = 0; c < 2; ++c) t += j.gamma_I[d](a, c) * j.B(c, b);
            s += Bi(e, d) * t;
          }
          j.gamma_dual[e](a, b) = s;
        }
  }

  for (int c = 0; c < 2; ++c) {
    double s = j.dB[0](c, 1) - j.dB[1](c, 0);
    for (int d = 0; d < 2; ++d) s += j.gamma_I[c](0, d) * j.B(d, 1) - j.gamma_I[c](1, d) * j.B(d, 0);
    j.codazzi_lhs[c] = s;
  }
  Vec2 low;
  for (int b = 0; b < 2; ++b) low[b] = j.ambient_R.apply(j.tangent[0], j.tangent[1], j.normal, j.tangent[b]);
  j.codazzi_rhs = inverse(j.I) * low;
  return j;
}

inline FundamentalData fundamental_forms(const SurfacePatch& patch, const MetricField& metric, const Vec2& q) {
  return immersion_jet(patch, metric, q);
}

// |(d^nabla B)(x, y) - (R(x, y) N)^T|_I; zero by the Codazzi equation.
inline double codazzi_residual(const ImmersionJet& j, const Vec2& x, const Vec2& y) {
  double w = x[0] * y[1] - x[1] * y[0];
  return std::abs(w) * metric_norm(j.I, j.codazzi_lhs - j.codazzi_rhs);
}
inline double codazzi_residual(const SurfacePatch& patch, const MetricField& metric, const Vec2& q, const Vec2& x,
                               const Vec2& y) {
  return codazzi_residual(immersion_jet(patch, metric, q), x, y);
}

// |det B - (K_I - K_M(T Sigma))|
inline double gauss_residual(const FundamentalData& d) { return std::abs(det(d.B) - (d.K_I - d.K_ambient)); }
inline double gauss_residual(const SurfacePatch& patch, const MetricField& metric, const Vec2& q) {
  return gauss_residual(immersion_jet(patch, metric, q));
}

// Largest violations of the algebraic relations among I, II, III and B.
struct FormResiduals {
  double self_adjoint = 0.0;  // I(Bx, y) - I(x, By)
  double third_form = 0.0;    // III - I(B., B.)
  double unit_normal = 0.0;   // g(N, N) - 1
  double normal_tangent = 0.0;
};

inline FormResiduals form_residuals(const ImmersionJet& j) {
  FormResiduals r;
  Mat2 IB = j.I * j.B;
  r.self_adjoint = std::abs(IB(0, 1) - IB(1, 0));
  r.third_form = max_abs(j.III - transpose(j.B) * j.I * j.B);
  r.unit_normal = std::abs(form(j.g, j.normal, j.normal) - 1.0);
  r.normal_tangent = std::max(std::abs(form(j.g, j.normal, j.tangent[0])), std::abs(form(j.g, j.normal, j.tangent[1])));
  return r;
}

}  // namespace efimov

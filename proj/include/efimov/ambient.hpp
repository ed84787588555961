#pragma once
// Riemannian metrics on coordinate charts of 3-space: Levi-Civita
// connection, curvature tensor, sectional curvatures and their range.
//
// Curvature convention: R(X,Y)Z = nabla_X nabla_Y Z - nabla_Y nabla_X Z - nabla_[X,Y] Z,
// so the sectional curvature of span(x, y) is g(R(x,y)y, x) / |x ^ y|^2.

#include <Eigen/Eigenvalues>
#include <array>
#include <cmath>
#include <utility>

#include "efimov/core/error.hpp"
#include "efimov/core/field.hpp"
#include "efimov/core/linalg.hpp"

namespace efimov {

using MetricField = SmoothField<3, Mat3>;
using MetricJet = Jet<Mat3, 3>;
using ChartPoint = Vec3;

// Gamma[k](i, j) = Gamma^k_ij in coordinates.
template <class T, int D>
using ChristoffelSymbols = std::array<Mat<T, D>, D>;

template <class T, int D>
ChristoffelSymbols<T, D> christoffel_symbols(const Mat<T, D>& g, const std::array<Mat<T, D>, D>& dg) {
  Mat<T, D> gi = inverse(g);
  ChristoffelSymbols<T, D> G;
  for (int k = 0; k < D; ++k)
    for (int i = 0; i < D; ++i)
      for (int j = i; j < D; ++j) {
        T s(0.0);
        for (int l = 0; l < D; ++l) s += gi(k, l) * (dg[i](l, j) + dg[j](l, i) - dg[l](i, j));
        G[k](i, j) = s * 0.5;
        G[k](j, i) = G[k](i, j);
      }
  return G;
}

// Contraction Gamma(x, y)^k = Gamma^k_ij x^i y^j.
template <class G_, class T, int D>
Vec<T, D> contract(const G_& G, const Vec<T, D>& x, const Vec<T, D>& y) {
  Vec<T, D> r;
  for (int k = 0; k < D; ++k) r[k] = form(G[k], x, y);
  return r;
}

// Fully covariant curvature R(a,b,c,d) = g(R(d_a, d_b) d_c, d_d).
template <int D>
struct RiemannTensor {
  std::array<double, D * D * D * D> r{};
  double& operator()(int a, int b, int c, int d) { return r[static_cast<std::size_t>(((a * D + b) * D + c) * D + d)]; }
  double operator()(int a, int b, int c, int d) const {
    return r[static_cast<std::size_t>(((a * D + b) * D + c) * D + d)];
  }
  double apply(const Vec<double, D>& x, const Vec<double, D>& y, const Vec<double, D>& z,
               const Vec<double, D>& w) const {
    double s = 0.0;
    for (int a = 0; a < D; ++a)
      for (int b = 0; b < D; ++b)
        for (int c = 0; c < D; ++c)
          for (int d = 0; d < D; ++d) s += (*this)(a, b, c, d) * x[a] * y[b] * z[c] * w[d];
    return s;
  }
};

// Curvature from Christoffel symbols carrying first derivatives.
template <int D>
RiemannTensor<D> riemann_from_christoffel(const Mat<double, D>& g, const ChristoffelSymbols<ad::Dual<double, D>, D>& G) {
  // Rup[l](i,j,k): R(d_i, d_j) d_k = Rup^l_ijk d_l
  RiemannTensor<D> R;
  std::array<double, D * D * D * D> up{};
  auto U = [&up](int l, int i, int j, int k) -> double& {
    return up[static_cast<std::size_t>(((l * D + i) * D + j) * D + k)];
  };
  for (int l = 0; l < D; ++l)
    for (int i = 0; i < D; ++i)
      for (int j = 0; j < D; ++j)
        for (int k = 0; k < D; ++k) {
          double s = G[l](j, k).d[i] - G[l](i, k).d[j];
          for (int m = 0; m < D; ++m) s += G[l](i, m).v * G[m](j, k).v - G[l](j, m).v * G[m](i, k).v;
          U(l, i, j, k) = s;
        }
  for (int i = 0; i < D; ++i)
    for (int j = 0; j < D; ++j)
      for (int k = 0; k < D; ++k)
        for (int d = 0; d < D; ++d) {
          double s = 0.0;
          for (int l = 0; l < D; ++l) s += g(d, l) * U(l, i, j, k);
          R(i, j, k, d) = s;
        }
  return R;
}

// Curvature from a metric jet of order >= 2.
template <int D>
RiemannTensor<D> riemann_from_jet(const Jet<Mat<double, D>, D>& j) {
  using T = ad::Dual<double, D>;
  Mat<T, D> g = lift1(j);
  std::array<Mat<T, D>, D> dg;
  for (int k = 0; k < D; ++k)
    for (int e = 0; e < D * D; ++e) {
      std::array<double, D> grad{};
      for (int a = 0; a < D; ++a) grad[a] = j.dd[k][a][e];
      dg[k][e] = seed1<D>(j.d[k][e], grad);
    }
  return riemann_from_christoffel<D>(j.value, christoffel_symbols<T, D>(g, dg));
}

template <int D>
ChristoffelSymbols<double, D> christoffel_from_jet(const Jet<Mat<double, D>, D>& j) {
  return christoffel_symbols<double, D>(j.value, j.d);
}

inline void check_metric(const Mat3& g, const ChartPoint& p) {
  double d = det(g);
  if (!(std::abs(d) > 1e-12)) fail(ErrorCode::NonInvertibleMetric, "det g = ", d, " at ", format_point(p));
}

inline MetricJet metric_jet(const MetricField& m, const ChartPoint& p, int order = 2) {
  MetricJet j = m.jet(p, order);
  check_metric(j.value, p);
  return j;
}

inline ChristoffelSymbols<double, 3> christoffel(const MetricField& m, const ChartPoint& p) {
  return christoffel_from_jet<3>(metric_jet(m, p, 1));
}

inline RiemannTensor<3> riemann(const MetricField& m, const ChartPoint& p) {
  return riemann_from_jet<3>(metric_jet(m, p, 2));
}

inline double sectional_from(const RiemannTensor<3>& R, const Mat3& g, const Vec3& x, const Vec3& y) {
  double gxx = form(g, x, x), gyy = form(g, y, y), gxy = form(g, x, y);
  double gram = gxx * gyy - gxy * gxy;
  if (!(gram > 1e-12 * std::abs(gxx * gyy))) fail(ErrorCode::DegeneratePlane, "vectors are nearly parallel");
  return R.apply(x, y, y, x) / gram;
}

inline double riemann_sectional(const MetricField& m, const ChartPoint& p, const Vec3& x, const Vec3& y) {
  MetricJet j = metric_jet(m, p, 2);
  return sectional_from(riemann_from_jet<3>(j), j.value, x, y);
}

// Extreme sectional curvatures: extreme eigenvalues of the curvature
// operator on 2-vectors, as a generalized symmetric eigenproblem.
inline std::pair<double, double> sectional_range_from(const RiemannTensor<3>& R, const Mat3& g) {
  static constexpr int pa[3][2] = {{0, 1}, {0, 2}, {1, 2}};
  Eigen::Matrix3d Q, G;
  for (int I = 0; I < 3; ++I)
    for (int J = 0; J < 3; ++J) {
      int a = pa[I][0], b = pa[I][1], c = pa[J][0], d = pa[J][1];
      Q(I, J) = R(a, b, d, c);
      G(I, J) = g(a, c) * g(b, d) - g(a, d) * g(b, c);
    }
  Q = 0.5 * (Q + Q.transpose()).eval();
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::Matrix3d> es(Q, G);
  if (es.info() != Eigen::Success) fail(ErrorCode::NonInvertibleMetric, "curvature operator eigen-solve failed");
  auto ev = es.eigenvalues();
  return {ev.minCoeff(), ev.maxCoeff()};
}

inline std::pair<double, double> sectional_range(const MetricField& m, const ChartPoint& p) {
  MetricJet j = metric_jet(m, p, 2);
  return sectional_range_from(riemann_from_jet<3>(j), j.value);
}

// Curvature components in the orthonormal frame obtained by normalizing
// the coordinate vectors of a diagonal metric: the three coordinate-plane
// sectional curvatures followed by g(R(e1,e2)e1,e3), g(R(e2,e1)e2,e3),
// g(R(e3,e1)e3,e2).
inline std::array<double, 6> frame_entries(const RiemannTensor<3>& R, const Mat3& g) {
  Vec3 e[3];
  for (int i = 0; i < 3; ++i) {
    e[i] = Vec3{};
    e[i][i] = 1.0 / std::sqrt(g(i, i));
  }
  return {R.apply(e[0], e[1], e[1], e[0]), R.apply(e[0], e[2], e[2], e[0]), R.apply(e[2], e[1], e[1], e[2]),
          R.apply(e[0], e[1], e[0], e[2]), R.apply(e[1], e[0], e[1], e[2]), R.apply(e[2], e[0], e[2], e[1])};
}

struct CurvatureSample {
  ChartPoint point;
  Mat3 metric;
  ChristoffelSymbols<double, 3> christoffel;
  RiemannTensor<3> riemann;
  double k_min = 0.0;
  double k_max = 0.0;
};

inline CurvatureSample curvature_sample(const MetricField& m, const ChartPoint& p) {
  MetricJet j = metric_jet(m, p, 2);
  CurvatureSample s;
  s.point = p;
  s.metric = j.value;
  s.christoffel = christoffel_from_jet<3>(j);
  s.riemann = riemann_from_jet<3>(j);
  std::tie(s.k_min, s.k_max) = sectional_range_from(s.riemann, s.metric);
  return s;
}

// Largest violation of the algebraic symmetries and the first Bianchi identity.
inline double symmetry_residual(const RiemannTensor<3>& R) {
  double r = 0.0;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      for (int c = 0; c < 3; ++c)
        for (int d = 0; d < 3; ++d) {
          r = std::max(r, std::abs(R(a, b, c, d) + R(b, a, c, d)));
          r = std::max(r, std::abs(R(a, b, c, d) + R(a, b, d, c)));
          r = std::max(r, std::abs(R(a, b, c, d) - R(c, d, a, b)));
          r = std::max(r, std::abs(R(a, b, c, d) + R(b, c, a, d) + R(c, a, b, d)));
        }
  return r;
}

}  // namespace efimov

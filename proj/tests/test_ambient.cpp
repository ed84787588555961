#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "efimov/ambient.hpp"
#include "efimov/gallery/models.hpp"

using namespace efimov;

namespace {

Box3 cube(double a) { return Box3{{{-a, -a, -a}}, {{a, a, a}}}; }

MetricField glambda(double lambda, DerivativeMode mode = DerivativeMode::Analytic) {
  auto m = MetricField::from_functor<2>("g_lambda", Box3{{{-2, -2, -0.2}}, {{2, 2, 0.2}}}, models::GLambda{lambda});
  m.set_mode(mode);
  return m;
}

Vec3 random_vector(std::mt19937& rng) {
  std::normal_distribution<double> n;
  return Vec3{{n(rng), n(rng), n(rng)}};
}

struct Singular {
  template <class T>
  Mat<T, 3> operator()(const Vec<T, 3>& x) const {
    Mat<T, 3> g = Mat<T, 3>::identity();
    g(2, 2) = x[0] * x[0];
    return g;
  }
};

}  // namespace

TEST(Christoffel, EuclideanVanishes) {
  auto m = MetricField::from_functor<2>("euclidean", cube(1), models::Euclidean3{});
  auto G = christoffel(m, Vec3{{0.2, -0.3, 0.5}});
  for (int k = 0; k < 3; ++k) EXPECT_EQ(max_abs(G[k]), 0.0);
}

TEST(Christoffel, PolarChart) {
  auto m = MetricField::from_functor<2>("polar", Box3{{{0.5, -4, -1}}, {{4, 4, 1}}}, models::PolarFlat3{});
  auto G = christoffel(m, Vec3{{2.0, 0.3, 0.0}});
  EXPECT_NEAR(G[0](1, 1), -2.0, 1e-14);
  EXPECT_NEAR(G[1](0, 1), 0.5, 1e-14);
  EXPECT_NEAR(G[1](1, 0), 0.5, 1e-14);
  m.set_mode(DerivativeMode::FiniteDifference);
  auto F = christoffel(m, Vec3{{2.0, 0.3, 0.0}});
  EXPECT_NEAR(F[0](1, 1), -2.0, 1e-9);
  EXPECT_NEAR(F[1](0, 1), 0.5, 1e-9);
}

TEST(Christoffel, GLambdaAnalyticMatchesFiniteDifferences) {
  Vec3 o{{0.0, 0.0, 0.0}};
  auto a = christoffel(glambda(1.0), o);
  auto f = christoffel(glambda(1.0, DerivativeMode::FiniteDifference), o);
  for (int k = 0; k < 3; ++k) EXPECT_LT(max_abs(a[k] - f[k]), 1e-6);
  auto Ra = riemann(glambda(1.0), Vec3{{0.1, 0.4, 0.05}});
  auto Rf = riemann(glambda(1.0, DerivativeMode::FiniteDifference), Vec3{{0.1, 0.4, 0.05}});
  for (std::size_t i = 0; i < Ra.r.size(); ++i) EXPECT_NEAR(Ra.r[i], Rf.r[i], 1e-6);
}

TEST(Sectional, ConstantCurvatureModels) {
  auto s3 = MetricField::from_functor<2>("sphere3", cube(1.5), models::Sphere3{});
  auto h3 = MetricField::from_functor<2>("hyperbolic3", cube(0.5), models::Hyperbolic3{});
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-0.45, 0.45);
  for (int n = 0; n < 20; ++n) {
    Vec3 p{{u(rng), u(rng), u(rng)}};
    Vec3 x = random_vector(rng), y = random_vector(rng);
    EXPECT_NEAR(riemann_sectional(s3, p, x, y), 1.0, 1e-6);
    EXPECT_NEAR(riemann_sectional(h3, p, x, y), -1.0, 1e-6);
    auto [lo, hi] = sectional_range(h3, p);
    EXPECT_NEAR(lo, -1.0, 1e-6);
    EXPECT_NEAR(hi, -1.0, 1e-6);
  }
}

TEST(Sectional, GLambdaCoordinatePlaneAtZeroHeight) {
  // lambda^2 - 1 for lambda = 1
  auto m = glambda(1.0);
  EXPECT_NEAR(riemann_sectional(m, Vec3{{0, 1, 0}}, Vec3{{1, 0, 0}}, Vec3{{0, 1, 0}}), 0.0, 1e-4);
}

TEST(Sectional, GLambdaRange) {
  auto m = glambda(1.0);
  auto [lo, hi] = sectional_range(m, Vec3{{0, 1, 0}});
  EXPECT_NEAR(lo, -2.0 * std::tanh(1.0), 1e-3);
  EXPECT_NEAR(lo, -1.52319, 1e-3);
  EXPECT_NEAR(hi, 1.52319, 1e-3);
  auto [lo0, hi0] = sectional_range(m, Vec3{{0.3, 0, 0}});
  EXPECT_NEAR(lo0, 0.0, 1e-4);
  EXPECT_NEAR(hi0, 0.0, 1e-4);
}

TEST(Sectional, FrameEntriesOnTheZeroSlice) {
  for (double lambda : {0.5, 1.0, 3.0}) {
    auto m = MetricField::from_functor<2>("g", Box3{{{-2, -2, -0.05}}, {{2, 2, 0.05}}}, models::GLambda{lambda});
    for (double y : {-1.0, -0.3, 0.0, 0.6, 1.0}) {
      auto j = metric_jet(m, Vec3{{0.2, y, 0.0}});
      auto e = frame_entries(riemann_from_jet<3>(j), j.value);
      double c = lambda * lambda - 1.0;
      EXPECT_NEAR(e[0], c, 1e-10);
      EXPECT_NEAR(e[1], c, 1e-10);
      EXPECT_NEAR(e[2], c, 1e-10);
      EXPECT_NEAR(e[3], 2 * lambda * std::tanh(y), 1e-10);
      EXPECT_NEAR(e[4], 0.0, 1e-10);
      EXPECT_NEAR(e[5], 0.0, 1e-10);
    }
  }
}

TEST(Sectional, RangeBracketsRandomPlanes) {
  auto m = glambda(0.7);
  std::mt19937 rng(99);
  Vec3 p{{0.3, 0.8, 0.1}};
  auto [lo, hi] = sectional_range(m, p);
  EXPECT_LE(lo, hi);
  for (int n = 0; n < 100; ++n) {
    double k = riemann_sectional(m, p, random_vector(rng), random_vector(rng));
    EXPECT_GE(k, lo - 1e-10);
    EXPECT_LE(k, hi + 1e-10);
  }
}

TEST(Riemann, SymmetriesAndBianchi) {
  auto p = Vec3{{0.2, -0.5, 0.07}};
  EXPECT_LT(symmetry_residual(riemann(glambda(2.0), p)), 1e-8);
  EXPECT_LT(symmetry_residual(riemann(glambda(2.0, DerivativeMode::FiniteDifference), p)), 1e-4);
}

TEST(Riemann, FiniteDifferenceOrder) {
  auto exact = riemann(glambda(1.0), Vec3{{0.0, 0.5, 0.05}});
  auto err = [&](double h) {
    auto m = glambda(1.0, DerivativeMode::FiniteDifference);
    m.set_richardson(false).set_step(h);
    auto R = riemann(m, Vec3{{0.0, 0.5, 0.05}});
    double e = 0.0;
    for (std::size_t i = 0; i < R.r.size(); ++i) e = std::max(e, std::abs(R.r[i] - exact.r[i]));
    return e;
  };
  double order = std::log2(err(4e-2) / err(2e-2));
  EXPECT_GE(order, 1.8);
}

TEST(AmbientErrors, OutsideChartSingularMetricDegeneratePlane) {
  auto m = glambda(1.0);
  EXPECT_THROW(christoffel(m, Vec3{{0, 0, 0.5}}), Error);
  auto fd = glambda(1.0, DerivativeMode::FiniteDifference);
  try {
    christoffel(fd, Vec3{{2.0 - 1e-4, 0, 0}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::PointOutsideChart);
  }
  auto s = MetricField::from_functor<2>("singular", cube(1), Singular{});
  try {
    christoffel(s, Vec3{{0, 0, 0}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonInvertibleMetric);
  }
  try {
    riemann_sectional(m, Vec3{{0, 0, 0}}, Vec3{{1, 2, 3}}, Vec3{{2, 4, 6}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegeneratePlane);
  }
}

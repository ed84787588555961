#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "efimov/connection.hpp"
#include "efimov/gallery/models.hpp"

using namespace efimov;

namespace {

MetricField euclid() { return MetricField::from_functor<2>("euclidean3", Box3{{{-5, -5, -5}}, {{5, 5, 5}}}, models::Euclidean3{}); }
MetricField sphere3() { return MetricField::from_functor<2>("sphere3", Box3{{{-3, -3, -3}}, {{3, 3, 3}}}, models::Sphere3{}); }
MetricField glambda(double l) {
  return MetricField::from_functor<2>("g_lambda", Box3{{{-2, -2, -0.2}}, {{2, 2, 0.2}}}, models::GLambda{l});
}

SurfaceConnection sphere_in_euclid() {
  return SurfaceConnection::immersion(
      SurfacePatch::from_functor("sphere", Box2{{{0.2, -3.5}}, {{2.9, 3.5}}}, models::RoundSpherePatch{}), euclid());
}
SurfaceConnection slice(double l) {
  return SurfaceConnection::immersion(
      SurfacePatch::from_functor("slice", Box2{{{-1.5, -1.5}}, {{1.5, 1.5}}}, models::PlanePatch{}), glambda(l));
}
SurfaceConnection deformed(double t) {
  Box2 box{{{1e-3, -4.0}}, {{6.0, 4.0}}};
  return SurfaceConnection::abstract(SurfaceMetric::from_functor<2>("hyperbolic_polar", box, models::HyperbolicPolar2{}),
                                     TangentField::from_functor<2>("angular", box, models::AngularTorsion{t}));
}

}  // namespace

TEST(DualConnection, SphereInEuclideanSpaceIsLeviCivitaOfIII) {
  auto c = sphere_in_euclid();
  for (Vec2 q : {Vec2{{0.5, 0.0}}, Vec2{{1.4, 2.0}}, Vec2{{2.2, -1.0}}}) {
    auto p = c.at(q);
    EXPECT_LT(torsion_norm(p), 1e-6);
    auto lc = christoffel_symbols<double, 2>(p.metric, p.dmetric);
    for (int k = 0; k < 2; ++k) EXPECT_LT(max_abs(lc[k] - p.gamma[k]), 1e-10);
    EXPECT_LT(compatibility_residual(p), 1e-10);
    EXPECT_NEAR(ktilde_at(c, q), 1.0, 1e-10);
    EXPECT_LT(dual_codazzi_residual(c, q, Vec2{{1, 0}}, Vec2{{0, 1}}), 1e-6);
  }
}

TEST(DualConnection, SaddleCurvatureAtOrigin) {
  auto c = SurfaceConnection::immersion(
      SurfacePatch::from_functor("saddle", Box2{{{-1, -1}}, {{1, 1}}}, models::SaddlePatch{}), euclid());
  EXPECT_NEAR(ktilde_at(c, Vec2{{0, 0}}), 1.0, 1e-6);
}

TEST(DualConnection, CliffordTorus) {
  auto c = SurfaceConnection::immersion(
      SurfacePatch::from_functor("torus", Box2{{{-7, -7}}, {{7, 7}}}, models::CliffordTorusPatch{}), sphere3());
  for (Vec2 q : {Vec2{{0.1, 0.2}}, Vec2{{2.0, -1.0}}}) {
    EXPECT_LT(torsion_norm(c.at(q)), 1e-6);
    EXPECT_LT(dual_codazzi_residual(c, q, Vec2{{1, 0}}, Vec2{{0, 1}}), 1e-6);
  }
}

TEST(DualConnection, GLambdaSliceTorsionEqualsCodazziDefect) {
  for (auto mode : {DerivativeMode::Analytic, DerivativeMode::FiniteDifference}) {
    auto m = glambda(1.0);
    m.set_mode(mode);
    auto c = SurfaceConnection::immersion(
        SurfacePatch::from_functor("slice", Box2{{{-1.5, -1.5}}, {{1.5, 1.5}}}, models::PlanePatch{}), m);
    for (Vec2 q : {Vec2{{0.0, 0.3}}, Vec2{{0.4, -0.8}}, Vec2{{-1.0, 1.0}}}) {
      auto p = c.at(q);
      Vec2 x{{1.0 / std::sqrt(p.metric(0, 0)), 0.0}};
      Vec2 y = p.J * x;
      EXPECT_NEAR(form(p.metric, y, y), 1.0, 1e-12);
      EXPECT_NEAR(form(p.metric, x, y), 0.0, 1e-12);
      EXPECT_NEAR(torsion_norm(p), codazzi_defect_norm(c, q, x, y), 1e-3);
      EXPECT_GT(torsion_norm(p), 0.1);
      EXPECT_LT(compatibility_residual(p), 1e-4);
      EXPECT_LT(dual_codazzi_residual(c, q, Vec2{{1, 0}}, Vec2{{0, 1}}), 1e-3);
    }
  }
}

TEST(DualConnection, DegenerateShapeOperator) {
  auto c = SurfaceConnection::immersion(
      SurfacePatch::from_functor("plane", Box2{{{-1, -1}}, {{1, 1}}}, models::PlanePatch{}), euclid());
  try {
    c.at(Vec2{{0, 0}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateShapeOperator);
  }
}

TEST(AbstractMode, RoundSphereCurvature) {
  Box2 box{{{0.1, -4}}, {{3.0, 4}}};
  auto c = SurfaceConnection::abstract(SurfaceMetric::from_functor<2>("s2", box, models::RoundSphereSpherical2{}),
                                       TangentField::from_functor<2>("zero", box, models::ZeroTorsion{}));
  for (double psi : {0.3, 1.0, 2.5}) EXPECT_NEAR(c.curvature(Vec2{{psi, 0.7}}), 1.0, 1e-12);
}

TEST(AbstractMode, DeformedHyperbolicTorsionAndCurvature) {
  // Independent closed form: beta = -t sinh r dtheta, so K = -1 - d beta(e_r, e_theta) = t coth r - 1.
  for (double t : {0.0, 1.0, 2.0}) {
    auto c = deformed(t);
    for (double r : {0.1, 0.5, 1.0, 2.0, 3.0}) {
      Vec2 q{{r, 0.3}};
      auto p = c.at(q);
      EXPECT_NEAR(torsion_norm(p), t, 1e-12);
      EXPECT_LT(torsion_consistency(p), 1e-12);
      EXPECT_LT(compatibility_residual(p), 1e-12);
      EXPECT_NEAR(c.curvature(q), t / std::tanh(r) - 1.0, 1e-10);
    }
  }
}

TEST(AbstractMode, ImmersionOnlyOperationsAreRejected) {
  auto c = deformed(1.0);
  try {
    c.immersion_jet(Vec2{{1, 0}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ModeUnsupported);
  }
}

TEST(Bounds, Tau0ClosedForm) {
  EXPECT_EQ(torsion_bound_tau0(-0.5, -0.5, -1.0), 0.0);
  EXPECT_NEAR(torsion_bound_tau0(-0.9, -0.8, -1.0), 0.1 / (2 * std::sqrt(0.1 * 0.2)), 1e-12);
  EXPECT_NEAR(torsion_bound_tau0(-0.9, -0.8, -1.0), 0.353553390593, 1e-12);
  EXPECT_NEAR(torsion_bound_tau0(0.0, 1.0, -1.0), 1.0 / (2 * std::sqrt(2.0)), 1e-12);
  EXPECT_THROW(torsion_bound_tau0(-1.0, 0.0, -1.0), Error);
}

TEST(Bounds, BruteForceAgreesWithClosedForm) {
  EXPECT_EQ(torsion_bound_bruteforce(0.3, 0.3, -1.0, 1000), 0.0);
  EXPECT_NEAR(torsion_bound_bruteforce(-0.9, -0.8, -1.0, 10000), 0.353553390593, 1e-6);
  EXPECT_NEAR(torsion_bound_bruteforce(0.0, 1.0, -1.0, 10000), 0.353553390593, 1e-6);
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> U(-3.0, 3.0), P(1e-3, 3.0);
  for (int n = 0; n < 100; ++n) {
    double K1 = U(rng), q1 = K1 + P(rng), q2 = K1 + P(rng);
    EXPECT_NEAR(torsion_bound_bruteforce(q1, q2, K1, 10000), torsion_bound_tau0(std::min(q1, q2), std::max(q1, q2), K1),
                1e-6);
  }
  EXPECT_THROW(torsion_bound_bruteforce(0.0, 1.0, -1.0, 10), Error);
  EXPECT_THROW(torsion_bound_bruteforce(-2.0, 1.0, -1.0, 1000), Error);
}

TEST(Bounds, K4K5) {
  auto a = curvature_bounds_k4k5(-1, 0, 0);
  EXPECT_EQ(a.first, 1.0);
  EXPECT_EQ(a.second, 1.0);
  auto b = curvature_bounds_k4k5(-1, -0.5, -0.25);
  EXPECT_DOUBLE_EQ(b.first, 1.0);
  EXPECT_DOUBLE_EQ(b.second, 2.0);
  auto c = curvature_bounds_k4k5(-1, 0.5, 1);
  EXPECT_DOUBLE_EQ(c.first, 0.5);
  EXPECT_DOUBLE_EQ(c.second, 1.0);
  EXPECT_THROW(curvature_bounds_k4k5(1, 2, 3), Error);
  EXPECT_THROW(curvature_bounds_k4k5(-1, 2, 1), Error);
}

TEST(Hypothesis, Examples) {
  auto e = check_hypothesis(-1, 0, 0);
  EXPECT_TRUE(e.excluded);
  EXPECT_EQ(e.lhs, 0.0);
  EXPECT_EQ(e.rhs, 16.0);
  EXPECT_EQ(e.margin, 16.0);
  EXPECT_EQ(e.regime, Regime::Both);
  EXPECT_TRUE(e.regimes_agree);

  auto g = check_hypothesis(-1, 2, 14);
  EXPECT_EQ(g.lhs, 144.0);
  EXPECT_EQ(g.rhs, 48.0);
  EXPECT_FALSE(g.excluded);

  auto n = check_hypothesis(-1, -0.9, -0.8);
  EXPECT_EQ(n.regime, Regime::K3NonPositive);
  EXPECT_NEAR(n.lhs, 0.01, 1e-15);
  EXPECT_NEAR(n.rhs, 0.32, 1e-15);
  EXPECT_TRUE(n.excluded);
  EXPECT_TRUE(n.sit_check);
  EXPECT_NEAR(n.tau0 * n.tau0, 0.125, 1e-12);
}

TEST(Hypothesis, BoundaryFamilyReportsSidesOutsideThePinchedRange) {
  for (double l : {1.0, 2.0}) {
    auto v = check_hypothesis(-1, l * l - 1 - 2 * l, l * l - 1 + 2 * l);
    EXPECT_FALSE(v.admissible);
    EXPECT_EQ(v.lhs, 16 * l * l);
    EXPECT_EQ(v.rhs, 16 * l * l - 32 * l);
    EXPECT_FALSE(v.excluded);
  }
  EXPECT_THROW(check_hypothesis(0.5, 1, 2), Error);
  EXPECT_THROW(check_hypothesis(-1, 2, 1), Error);
}

TEST(Hypothesis, ScaleCovarianceAndSitImplication) {
  std::mt19937 rng(77);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int n = 0; n < 1000; ++n) {
    double K1 = -0.1 - 3 * U(rng);
    double K2 = K1 + 4 * U(rng) + 1e-6;
    double K3 = K2 + 6 * U(rng);
    auto v = check_hypothesis(K1, K2, K3);
    if (v.excluded) EXPECT_TRUE(v.sit_check) << K1 << " " << K2 << " " << K3;
    for (double c : {0.25, 3.0}) EXPECT_EQ(check_hypothesis(c * K1, c * K2, c * K3).excluded, v.excluded);
  }
}

TEST(Bounds, MeasuredOnTheGLambdaSlice) {
  auto c = slice(1.0);
  std::vector<Vec2> s;
  for (int i = 0; i <= 10; ++i)
    for (int j = 0; j <= 10; ++j) s.push_back(Vec2{{-1.0 + 0.2 * i, -0.5 + 0.1 * j}});
  auto b = measure_bounds(c, s);
  EXPECT_NEAR(b.K1, -1.0, 1e-8);
  EXPECT_LT(b.K1, b.K2);
  for (const auto& q : s) {
    double k = ktilde_at(c, q);
    EXPECT_GE(k, b.K4 - 1e-8);
    EXPECT_LE(k, b.K5 + 1e-8);
  }
  EXPECT_LE(b.tau0_measured, b.tau0 + 1e-8);
}

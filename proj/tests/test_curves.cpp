#include <gtest/gtest.h>

#include <cmath>

#include "efimov/curves.hpp"
#include "efimov/gallery/models.hpp"

using namespace efimov;

namespace {

template <class M, class T = models::ZeroTorsion>
SurfaceConnection abstract(const char* name, Box2 box, M metric, T torsion = {}) {
  return SurfaceConnection::abstract(SurfaceMetric::from_functor<2>(name, box, metric),
                                     TangentField::from_functor<2>("torsion", box, torsion));
}

SurfaceConnection stereo_sphere() { return abstract("s2", Box2{{{-3, -3}}, {{3, 3}}}, models::RoundSphereStereo2{}); }
SurfaceConnection flat() { return abstract("plane", Box2{{{-5, -5}}, {{5, 5}}}, models::FlatPlane2{}); }
SurfaceConnection spherical() { return abstract("s2", Box2{{{0.1, -10}}, {{3.0, 10}}}, models::RoundSphereSpherical2{}); }
SurfaceConnection poincare() { return abstract("h2", Box2{{{-0.9, -0.9}}, {{0.9, 0.9}}}, models::PoincareDisk2{}); }
SurfaceConnection deformed(double t) {
  return abstract("h2_polar", Box2{{{1e-3, -4.0}}, {{6.0, 4.0}}}, models::HyperbolicPolar2{}, models::AngularTorsion{t});
}

Vec2 unit(const SurfaceConnection& c, Vec2 q, Vec2 v) { return v / metric_norm(c.at(q).metric, v); }

// Latitude psi of the spherical chart, unit speed, counterclockwise about the north pole.
CurveTrace latitude_trace(double psi, double L, double h) {
  CurveTrace tr;
  tr.step = h;
  int n = static_cast<int>(std::round(L / h));
  for (int i = 0; i <= n; ++i)
    tr.samples.push_back({i * h, Vec2{{psi, i * h / std::sin(psi)}}, Vec2{{0.0, 1.0 / std::sin(psi)}}});
  tr.length = n * h;
  return tr;
}

ParametrizedCurve latitude(double psi) {
  ParametrizedCurve c;
  c.position = [=](double t) { return Vec2{{psi, t}}; };
  c.velocity = [](double) { return Vec2{{0.0, 1.0}}; };
  c.acceleration = [](double) { return Vec2{}; };
  c.t0 = 0.0;
  c.t1 = 2.0 * M_PI;
  return c;
}

}  // namespace

TEST(Geodesic, GreatCircleClosesAfterTwoPi) {
  auto s = stereo_sphere();
  Vec2 q{{1.0, 0.0}};
  auto tr = integrate_geodesic(s, q, unit(s, q, {{0.0, 1.0}}), 2.0 * M_PI, 1e-3);
  ASSERT_TRUE(tr.complete());
  EXPECT_LT(norm(tr.back().point - q), 1e-6);
  EXPECT_TRUE(tr.closed);
  for (const auto& smp : tr.samples) EXPECT_NEAR(norm(smp.point), 1.0, 1e-8);
}

TEST(Geodesic, FlatPlaneLinesAreStraight) {
  auto c = flat();
  auto tr = integrate_geodesic(c, {{0.1, 0.2}}, {{0.6, 0.8}}, 3.0, 1e-2);
  for (const auto& smp : tr.samples) {
    EXPECT_NEAR(smp.point[0], 0.1 + 0.6 * smp.s, 1e-12);
    EXPECT_NEAR(smp.point[1], 0.2 + 0.8 * smp.s, 1e-12);
  }
}

TEST(Geodesic, RadialHyperbolicGeodesicStaysRadial) {
  auto c = deformed(0.0);
  auto tr = integrate_geodesic(c, {{0.5, 0.3}}, {{1.0, 0.0}}, 2.0, 1e-3);
  ASSERT_TRUE(tr.complete());
  for (const auto& smp : tr.samples) EXPECT_NEAR(smp.point[1], 0.3, 1e-8);
  EXPECT_NEAR(tr.back().point[0], 2.5, 1e-8);
}

TEST(Geodesic, SpeedDriftPerUnitLength) {
  auto c = deformed(1.0);
  Vec2 q{{1.0, 0.2}};
  auto tr = integrate_geodesic(c, q, unit(c, q, {{0.3, 0.7}}), 2.0, 1e-3);
  ASSERT_TRUE(tr.complete());
  double drift = 0.0;
  for (const auto& smp : tr.samples) drift = std::max(drift, std::abs(metric_norm(c.at(smp.point).metric, smp.velocity) - 1.0));
  EXPECT_LT(drift / tr.length, 1e-8);
}

TEST(Geodesic, RejectsNonUnitVelocity) {
  auto c = flat();
  EXPECT_THROW(integrate_geodesic(c, {{0, 0}}, {{1.0, 1.0}}, 1.0, 1e-2), Error);
}

TEST(Geodesic, LeavingThePatchReturnsPartialTrace) {
  auto c = poincare();
  auto tr = integrate_geodesic(c, {{0.0, 0.0}}, unit(c, {{0.0, 0.0}}, {{1.0, 0.0}}), 10.0, 1e-2);
  EXPECT_EQ(tr.status, TraceStatus::LeftPatch);
  EXPECT_GT(tr.samples.size(), 10u);
  EXPECT_LT(tr.length, 10.0);
}

TEST(Transport, PreservesNorm) {
  auto c = deformed(2.0);
  Vec2 q{{1.0, 0.0}};
  auto tr = integrate_geodesic(c, q, unit(c, q, {{0.2, 1.0}}), 1.5, 1e-3);
  auto r = parallel_transport(c, tr, Vec2{{0.3, -0.4}});
  EXPECT_LT(r.norm_drift, 1e-8);
  EXPECT_EQ(r.history.size(), tr.samples.size());
}

TEST(Transport, GeodesicVelocityIsParallel) {
  auto c = deformed(1.0);
  Vec2 q{{1.2, 0.5}};
  auto tr = integrate_geodesic(c, q, unit(c, q, {{1.0, 0.5}}), 1.0, 1e-3);
  auto r = parallel_transport(c, tr, tr.front().velocity);
  EXPECT_LT(norm(r.vector - tr.back().velocity), 1e-9);
}

TEST(Transport, FlatLoopIsIdentity) {
  auto c = flat();
  auto h = holonomy(c, circle_region({{0.5, -0.2}}, 1.3));
  EXPECT_LT(std::abs(h.angle), 1e-10);
  EXPECT_LT(h.mismatch, 1e-10);
}

TEST(Transport, RightAngledTriangleRotatesByQuarterTurn) {
  auto s = stereo_sphere();
  std::vector<PolygonSide> sides(3, PolygonSide{M_PI / 2, M_PI / 2});
  auto region = geodesic_polygon(s, {{0.0, 0.0}}, {{1.0, 0.0}}, sides, 1e-3);
  auto h = holonomy(s, region);
  EXPECT_NEAR(h.angle, M_PI / 2, 1e-4);
  EXPECT_LT(h.mismatch, 1e-3);
  auto gb = gauss_bonnet(s, region);
  EXPECT_NEAR(gb.corner_sum, 1.5 * M_PI, 1e-6);
  EXPECT_NEAR(gb.area, M_PI / 2, 1e-4);
  EXPECT_LT(gb.residual, 1e-4);
}

TEST(Transport, SmallLoopRotationMatchesCurvatureTimesArea) {
  // Curvature of the deformed connection is t coth r - 1.
  auto c = deformed(2.0);
  for (double rho : {0.04, 0.02}) {
    auto region = circle_region({{1.0, 0.0}}, rho);
    auto h = holonomy(c, region);
    double A = region_integral(c, region).second;
    double K = 2.0 / std::tanh(1.0) - 1.0;
    EXPECT_NEAR(h.angle / A, K, 4.0 * rho * rho);
  }
}

TEST(GeodesicCurvature, GeodesicIsZero) {
  auto c = deformed(1.0);
  Vec2 q{{1.0, 0.0}};
  auto tr = integrate_geodesic(c, q, unit(c, q, {{0.5, 1.0}}), 1.0, 1e-3);
  for (std::size_t i = 1; i + 1 < tr.samples.size(); i += 37) EXPECT_NEAR(geodesic_curvature(c, tr, i), 0.0, 1e-6);
  EXPECT_THROW(geodesic_curvature(c, tr, std::size_t{0}), Error);
  EXPECT_THROW(geodesic_curvature(c, tr, tr.samples.size() - 1), Error);
}

TEST(GeodesicCurvature, LatitudeCircle) {
  auto c = spherical();
  for (double psi : {0.4, 1.0, 2.2}) {
    auto tr = latitude_trace(psi, 1.0, 1e-3);
    EXPECT_NEAR(geodesic_curvature(c, tr, 0.5), 1.0 / std::tan(psi), 1e-5);
    EXPECT_NEAR(geodesic_curvature(c, latitude(psi), 0.3), 1.0 / std::tan(psi), 1e-12);
  }
}

TEST(GeodesicCurvature, FlatCircle) {
  auto c = flat();
  for (double r : {0.25, 1.0, 3.0}) {
    auto circle = chart_circle({{0.5, 0.5}}, r);
    EXPECT_NEAR(geodesic_curvature(c, circle, 1.0), 1.0 / r, 1e-12);
    CurveTrace tr;
    tr.step = 1e-3;
    for (int i = 0; i <= 100; ++i) {
      double s = i * 1e-3, a = s / r;
      tr.samples.push_back({s, circle.position(a), circle.velocity(a) / r});
    }
    EXPECT_NEAR(geodesic_curvature(c, tr, std::size_t{50}), 1.0 / r, 1e-6);
  }
}

TEST(Jacobi, SineClosedForm) {
  JacobiCoefficients k{[](double) { return 1.0; }, [](double) { return 0.0; }, [](double) { return 0.0; }};
  auto tr = jacobi_field(k, 3.0, 0, 0, 0, 1, 1e-4);
  double err = 0.0;
  for (const auto& s : tr.samples) {
    err = std::max(err, std::abs(s.y - std::sin(s.t)));
    err = std::max(err, std::abs(s.dy - std::cos(s.t)));
    EXPECT_EQ(s.x, 0.0);
  }
  EXPECT_LT(err, 1e-8);
}

TEST(Jacobi, FourthOrderConvergence) {
  JacobiCoefficients k{[](double) { return 1.0; }, [](double) { return 0.0; }, [](double) { return 0.0; }};
  auto sup = [&](double h) {
    double e = 0.0;
    for (const auto& s : jacobi_field(k, 3.0, 0, 0, 0, 1, h).samples) e = std::max(e, std::abs(s.y - std::sin(s.t)));
    return e;
  };
  EXPECT_GE(sup(0.1) / sup(0.05), 8.0);
  EXPECT_GE(sup(0.05) / sup(0.025), 8.0);
}

TEST(Jacobi, SandwichAndTorsionBound) {
  const double tau0 = 0.7;
  JacobiCoefficients k{[](double) { return 1.0; }, [=](double) { return tau0; }, [](double) { return 0.0; }};
  auto tr = jacobi_field(k, 2.5, 0, 0, 0, 1, 1e-3);
  EXPECT_GE(tr.t_g, 1.8);
  EXPECT_LT(tr.t_g, 1.9);
  EXPECT_TRUE(tr.x_bound);
  EXPECT_NEAR(tr.tau0, tau0, 1e-15);
  for (const auto& s : tr.samples) EXPECT_NEAR(s.x, tau0 * (1.0 - std::cos(s.t)), 1e-10);
}

TEST(Jacobi, RejectsInconsistentInitialSlope) {
  JacobiCoefficients k{[](double) { return 1.0; }, [](double) { return 0.5; }, [](double) { return 0.0; }};
  EXPECT_THROW(jacobi_field(k, 1.0, 0, 1, 0, 1, 1e-2), Error);
  EXPECT_NO_THROW(jacobi_field(k, 1.0, 0, 1, 0.5, 1, 1e-2));
}

TEST(Jacobi, AlongSphereGeodesicIsSine) {
  auto s = stereo_sphere();
  Vec2 q{{0.0, 0.0}};
  auto base = integrate_geodesic(s, q, unit(s, q, {{1.0, 0.0}}), 2.0, 1e-3);
  auto tr = jacobi_field(s, base, 0, 0, 0, 1, 1e-3);
  for (const auto& js : tr.samples) {
    EXPECT_NEAR(js.y, std::sin(js.t), 1e-9);
    EXPECT_NEAR(js.K, 1.0, 1e-9);
  }
}

// A family of geodesics from one point with rotating initial direction has
// variation field x g' + y J g' solving the Jacobi-type system.
TEST(Jacobi, MatchesGeodesicFamilyWithTorsion) {
  auto c = deformed(1.0);
  Vec2 q{{1.0, 0.3}};
  Vec2 v = unit(c, q, {{0.4, 0.8}});
  ConnectionPoint cp = c.at(q);
  auto rotated = [&](double a) { return v * std::cos(a) + (cp.J * v) * std::sin(a); };
  const double L = 1.2, h = 1e-3, da = 1e-4;
  auto base = integrate_geodesic(c, q, v, L, h);
  auto plus = integrate_geodesic(c, q, rotated(da), L, h);
  auto minus = integrate_geodesic(c, q, rotated(-da), L, h);
  auto tr = jacobi_field(c, base, 0, 0, 0, 1, h);
  ASSERT_EQ(tr.samples.size(), base.samples.size());
  double max_tau_x = 0.0;
  for (std::size_t i = 0; i < base.samples.size(); i += 50) {
    Vec2 dot_g = (plus.samples[i].point - minus.samples[i].point) / (2 * da);
    ConnectionPoint p = c.at(base.samples[i].point);
    Vec2 g1 = base.samples[i].velocity;
    EXPECT_NEAR(tr.samples[i].x, form(p.metric, dot_g, g1), 1e-6);
    EXPECT_NEAR(tr.samples[i].y, form(p.metric, dot_g, p.J * g1), 1e-6);
    max_tau_x = std::max(max_tau_x, std::abs(tr.samples[i].tau_x));
  }
  EXPECT_GT(max_tau_x, 0.1);  // the torsion terms are exercised
}

TEST(GaussBonnet, SphericalCap) {
  auto s = stereo_sphere();
  auto gb = gauss_bonnet(s, circle_region({{0.0, 0.0}}, std::tan(M_PI / 6)));
  EXPECT_NEAR(gb.area, M_PI, 1e-6);
  EXPECT_NEAR(gb.boundary_integral, M_PI, 1e-6);
  EXPECT_LT(gb.residual, 1e-4);
}

TEST(GaussBonnet, HyperbolicDisk) {
  auto h = poincare();
  auto region = circle_region({{0.0, 0.0}}, std::tanh(0.5));
  auto gb = gauss_bonnet(h, region);
  EXPECT_NEAR(gb.area, 2 * M_PI * (std::cosh(1.0) - 1.0), 1e-6);
  EXPECT_LT(gb.residual, 1e-4);
  EXPECT_LT(holonomy(h, region).mismatch, 1e-3);
}

TEST(GaussBonnet, DeformedConnectionDisk) {
  auto c = deformed(2.0);
  auto region = circle_region({{1.2, 0.4}}, 0.5);
  auto gb = gauss_bonnet(c, region);
  EXPECT_LT(gb.residual, 1e-3);
  EXPECT_GT(std::abs(gb.curvature_integral), 0.1);
  EXPECT_LT(holonomy(c, region).mismatch, 1e-3);
}

TEST(GaussBonnet, OffCenterCap) {
  auto s = stereo_sphere();
  EXPECT_LT(gauss_bonnet_residual(s, circle_region({{0.4, -0.3}}, 0.7)), 1e-4);
}

TEST(GaussBonnet, OpenBoundaryIsRejected) {
  auto h = poincare();
  auto open = geodesic_polygon(h, {{-0.1, -0.1}}, {{1.0, 0.0}}, {{0.8, 2.0}, {0.9, 0.0}}, 1e-3);
  try {
    gauss_bonnet(h, open);
    FAIL() << "expected OpenBoundary";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::OpenBoundary);
  }
}

TEST(DeformationRate, LatitudeOnSphere) {
  auto c = spherical();
  for (double psi : {0.7, 1.2}) {
    auto r = deformation_rate_check(c, latitude(psi), [](double) { return 1.0; }, 1.0);
    EXPECT_NEAR(r.formula, 1.0 / std::pow(std::sin(psi), 2), 1e-8);
    EXPECT_LT(r.residual, 1e-4);
  }
}

TEST(DeformationRate, FlatCircle) {
  auto c = flat();
  auto r = deformation_rate_check(c, chart_circle({{0, 0}}, 0.5), [](double) { return 1.0; }, 0.4);
  EXPECT_NEAR(r.formula, 4.0, 1e-9);
  EXPECT_NEAR(r.finite_difference, 4.0, 1e-5);
}

TEST(DeformationRate, DeformedConnectionWithVaryingProfile) {
  auto c = deformed(1.0);
  auto circle = chart_circle({{1.0, 0.2}}, 0.3);
  for (double t : {0.0, 1.0, 2.5, 4.0}) {
    auto a = deformation_rate_check(c, circle, [](double) { return 1.0; }, t);
    EXPECT_LT(a.residual, 1e-3) << "t=" << t;
    auto b = deformation_rate_check(c, circle, [](double s) { return 1.0 + 0.4 * std::sin(2 * s); }, t);
    EXPECT_LT(b.residual, 1e-3) << "t=" << t;
  }
}

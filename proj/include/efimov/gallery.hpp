#pragma once
// Ready-made examples with closed-form reference data, their numerical
// verification, and the virtual third fundamental form of an endomorphism
// field.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "efimov/ambient.hpp"
#include "efimov/connection.hpp"
#include "efimov/core/error.hpp"
#include "efimov/core/numerics.hpp"
#include "efimov/gallery/models.hpp"
#include "efimov/immersion.hpp"

namespace efimov {

using ScalarField2 = SmoothField<2, double>;
using EndomorphismField = SmoothField<2, Mat2>;  // H(i, j) = component i of H d_j

// A group of reference fields checked together on one grid. Surface probes
// read the first two coordinates of each grid point.
struct Probe {
  std::string name;
  std::vector<std::string> fields;
  std::vector<double> tolerances;
  std::vector<Vec3> grid;
  std::function<std::vector<double>(const Vec3&)> measure;
  std::function<std::vector<double>(const Vec3&)> expected;
};

struct ExampleCase {
  std::string name;
  std::map<std::string, double> parameters;
  std::optional<MetricField> ambient;
  std::optional<SurfaceConnection> connection;
  std::vector<Probe> probes;

  const Probe& probe(const std::string& n) const {
    for (const auto& p : probes)
      if (p.name == n) return p;
    fail(ErrorCode::InvalidArgument, "example '", name, "' has no probe '", n, "'");
  }
  Probe& probe(const std::string& n) {
    return const_cast<Probe&>(static_cast<const ExampleCase&>(*this).probe(n));
  }
};

struct FieldResult {
  std::string name;
  double max_abs_err = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::size_t points = 0;
};

struct VerificationReport {
  std::string example;
  std::map<std::string, double> parameters;
  std::vector<FieldResult> fields;

  bool pass() const {
    return std::all_of(fields.begin(), fields.end(), [](const FieldResult& f) { return f.pass; });
  }
  const FieldResult& field(const std::string& n) const {
    for (const auto& f : fields)
      if (f.name == n) return f;
    fail(ErrorCode::InvalidArgument, "no field '", n, "' in the report");
  }
};

namespace detail {

inline std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = n == 1 ? a : a + (b - a) * i / (n - 1);
  return v;
}

inline std::vector<Vec3> grid3(const std::vector<double>& xs, const std::vector<double>& ys, const std::vector<double>& zs) {
  std::vector<Vec3> g;
  for (double z : zs)
    for (double y : ys)
      for (double x : xs) g.push_back({{x, y, z}});
  return g;
}

inline double param(const std::map<std::string, double>& p, const std::string& key, double fallback) {
  auto it = p.find(key);
  return it == p.end() ? fallback : it->second;
}

inline void allow_only(const std::string& example, const std::map<std::string, double>& p,
                       std::initializer_list<const char*> keys) {
  for (const auto& [k, v] : p) {
    if (std::find_if(keys.begin(), keys.end(), [&](const char* s) { return k == s; }) == keys.end())
      fail(ErrorCode::InvalidArgument, "example '", example, "' has no parameter '", k, "'");
    if (!std::isfinite(v)) fail(ErrorCode::ParameterOutOfRange, "parameter ", k, " is not finite");
  }
}

inline Vec2 surface_point(const Vec3& p) { return Vec2{{p[0], p[1]}}; }

// Checks of a connection built from an immersion into a space form:
// torsion and the dual Codazzi residual vanish.
inline Probe space_form_surface_probe(const SurfaceConnection& c, std::vector<Vec3> grid) {
  return Probe{"surface",
               {"torsion_norm", "dual_codazzi"},
               {1e-6, 1e-6},
               std::move(grid),
               [c](const Vec3& p) {
                 Vec2 q = surface_point(p);
                 return std::vector<double>{torsion_norm(c.at(q)), dual_codazzi_residual(c, q, {{1, 0}}, {{0, 1}})};
               },
               [](const Vec3&) { return std::vector<double>{0.0, 0.0}; }};
}

inline Probe constant_curvature_probe(const MetricField& m, double K, std::vector<Vec3> grid) {
  return Probe{"ambient",
               {"k_min", "k_max"},
               {1e-8, 1e-8},
               std::move(grid),
               [m](const Vec3& p) {
                 auto [lo, hi] = sectional_range(m, p);
                 return std::vector<double>{lo, hi};
               },
               [K](const Vec3&) { return std::vector<double>{K, K}; }};
}

inline std::vector<Vec3> surface_grid(double u0, double u1, double v0, double v1, int n) {
  return grid3(linspace(u0, u1, n), linspace(v0, v1, n), {0.0});
}

}  // namespace detail

// Builds one of euclidean3, sphere3, hyperbolic3, g_lambda (lambda, z_max),
// hyperbolic_deformed (t), clifford_torus, saddle (a), constant_k_surface (K).
inline ExampleCase build_example(const std::string& name, const std::map<std::string, double>& params = {}) {
  using detail::grid3;
  using detail::linspace;
  ExampleCase ex;
  ex.name = name;
  ex.parameters = params;

  if (name == "euclidean3" || name == "sphere3" || name == "hyperbolic3") {
    detail::allow_only(name, params, {});
    if (name == "euclidean3") {
      ex.ambient = MetricField::from_functor<2>(name, Box3{{{-5, -5, -5}}, {{5, 5, 5}}}, models::Euclidean3{});
      ex.connection = SurfaceConnection::immersion(
          SurfacePatch::from_functor("pseudosphere", Box2{{{0.2, -4}}, {{3, 4}}}, models::PseudospherePatch{}), *ex.ambient);
      ex.probes.push_back(detail::constant_curvature_probe(*ex.ambient, 0.0, grid3(linspace(-2, 2, 5), linspace(-2, 2, 5), linspace(-2, 2, 5))));
      ex.probes.push_back(detail::space_form_surface_probe(*ex.connection, detail::surface_grid(0.4, 2.5, -3, 3, 7)));
    } else if (name == "sphere3") {
      ex.ambient = MetricField::from_functor<2>(name, Box3{{{-3, -3, -3}}, {{3, 3, 3}}}, models::Sphere3{});
      ex.connection = SurfaceConnection::immersion(
          SurfacePatch::from_functor("clifford_torus", Box2{{{-7, -7}}, {{7, 7}}}, models::CliffordTorusPatch{}), *ex.ambient);
      ex.probes.push_back(detail::constant_curvature_probe(*ex.ambient, 1.0, grid3(linspace(-2, 2, 5), linspace(-2, 2, 5), linspace(-2, 2, 5))));
      ex.probes.push_back(detail::space_form_surface_probe(*ex.connection, detail::surface_grid(-3, 3, -3, 3, 7)));
    } else {
      ex.ambient = MetricField::from_functor<2>(name, Box3{{{-0.55, -0.55, -0.55}}, {{0.55, 0.55, 0.55}}}, models::Hyperbolic3{});
      ex.connection = SurfaceConnection::immersion(
          SurfacePatch::from_functor("sphere", Box2{{{0.2, -3.5}}, {{2.9, 3.5}}}, models::RoundSpherePatch{0.3, {}}),
          *ex.ambient);
      ex.probes.push_back(detail::constant_curvature_probe(*ex.ambient, -1.0, grid3(linspace(-0.5, 0.5, 5), linspace(-0.5, 0.5, 5), linspace(-0.5, 0.5, 5))));
      ex.probes.push_back(detail::space_form_surface_probe(*ex.connection, detail::surface_grid(0.4, 2.7, -3, 3, 7)));
    }
    return ex;
  }

  if (name == "g_lambda") {
    detail::allow_only(name, params, {"lambda", "z_max"});
    const double l = detail::param(params, "lambda", 1.0);
    if (!(l >= 0.0)) fail(ErrorCode::ParameterOutOfRange, "lambda must be >= 0, got ", l);
    const double z_max = detail::param(params, "z_max", l > 0.0 ? std::min(0.2, 1.0 / (4.0 * l)) : 0.2);
    if (!(z_max > 0.0)) fail(ErrorCode::ParameterOutOfRange, "z_max must be positive, got ", z_max);
    if (!(1.0 - 2.0 * l * z_max > 0.0))
      fail(ErrorCode::ParameterOutOfRange, "g_lambda is not positive definite on |z| <= ", z_max, ": 1 - 2 lambda z = ",
           1.0 - 2.0 * l * z_max);
    ex.parameters["lambda"] = l;
    ex.parameters["z_max"] = z_max;
    ex.ambient = MetricField::from_functor<2>(name, Box3{{{-2, -2, -z_max}}, {{2, 2, z_max}}}, models::GLambda{l});
    ex.connection = SurfaceConnection::immersion(
        SurfacePatch::from_functor("slice", Box2{{{-1.5, -1.5}}, {{1.5, 1.5}}}, models::PlanePatch{}), *ex.ambient);
    // Pipeline: finite differences with h = 1e-3 and one Richardson step.
    MetricField fd = *ex.ambient;
    fd.set_mode(DerivativeMode::FiniteDifference).set_step(1e-3).set_richardson(true);
    ex.probes.push_back(Probe{"riemann",
                              {"K_12", "K_13", "K_23", "R_1213", "R_2123", "R_3132"},
                              std::vector<double>(6, 1e-3),
                              grid3(linspace(-1, 1, 11), linspace(-1, 1, 11), {0.0}),
                              [fd](const Vec3& p) {
                                auto e = frame_entries(riemann(fd, p), fd(p));
                                return std::vector<double>(e.begin(), e.end());
                              },
                              [l](const Vec3& p) {
                                double k = l * l - 1.0;
                                return std::vector<double>{k, k, k, 2.0 * l * std::tanh(p[1]), 0.0, 0.0};
                              }});
    return ex;
  }

  if (name == "hyperbolic_deformed") {
    detail::allow_only(name, params, {"t"});
    const double t = detail::param(params, "t", 1.0);
    if (!(t >= 0.0)) fail(ErrorCode::ParameterOutOfRange, "t must be >= 0, got ", t);
    ex.parameters["t"] = t;
    Box2 box{{{1e-3, -4.0}}, {{6.0, 4.0}}};
    ex.connection = SurfaceConnection::abstract(SurfaceMetric::from_functor<2>("hyperbolic_polar", box, models::HyperbolicPolar2{}),
                                                TangentField::from_functor<2>("angular", box, models::AngularTorsion{t}));
    std::vector<Vec3> grid;
    for (double r : linspace(0.1, 3.0, 100)) grid.push_back({{r, 0.3, 0.0}});
    const SurfaceConnection c = *ex.connection;
    // The reference curvature is t tanh(r) - 1; the connection form gives t coth(r) - 1.
    ex.probes.push_back(Probe{"connection",
                              {"torsion_norm", "curvature", "curvature_coth"},
                              {1e-8, 1e-5, 1e-5},
                              grid,
                              [c](const Vec3& p) {
                                Vec2 q = detail::surface_point(p);
                                double K = c.frame_curvature(q);
                                return std::vector<double>{torsion_norm(c.at(q)), K, K};
                              },
                              [t](const Vec3& p) {
                                return std::vector<double>{t, t * std::tanh(p[0]) - 1.0, t / std::tanh(p[0]) - 1.0};
                              }});
    return ex;
  }

  auto surface_probe = [](const SurfaceConnection& c, std::vector<Vec3> grid, std::function<double(const Vec2&)> K_I,
                          double K_e) {
    return Probe{"surface",
                 {"K_I", "det_B", "gauss_residual", "torsion_norm", "III_minus_I_B"},
                 {1e-8, 1e-8, 1e-8, 1e-6, 1e-8},
                 std::move(grid),
                 [c](const Vec3& p) {
                   Vec2 q = detail::surface_point(p);
                   ImmersionJet j = c.immersion_jet(q);
                   return std::vector<double>{j.K_I, det(j.B), gauss_residual(j), torsion_norm(c.at(q)),
                                              form_residuals(j).third_form};
                 },
                 [K_I, K_e](const Vec3& p) {
                   return std::vector<double>{K_I(detail::surface_point(p)), K_e, 0.0, 0.0, 0.0};
                 }};
  };

  if (name == "clifford_torus") {
    detail::allow_only(name, params, {});
    ex.ambient = MetricField::from_functor<2>("sphere3", Box3{{{-3, -3, -3}}, {{3, 3, 3}}}, models::Sphere3{});
    ex.connection = SurfaceConnection::immersion(
        SurfacePatch::from_functor(name, Box2{{{-7, -7}}, {{7, 7}}}, models::CliffordTorusPatch{}), *ex.ambient);
    const SurfaceConnection c = *ex.connection;
    ex.probes.push_back(surface_probe(c, detail::surface_grid(-3, 3, -3, 3, 9), [](const Vec2&) { return 0.0; }, -1.0));
    // B^2 = 1, so III = I.
    ex.probes.push_back(Probe{"third_form",
                              {"III_minus_I"},
                              {1e-8},
                              detail::surface_grid(-3, 3, -3, 3, 9),
                              [c](const Vec3& p) {
                                ImmersionJet j = c.immersion_jet(detail::surface_point(p));
                                return std::vector<double>{max_abs(j.III - j.I)};
                              },
                              [](const Vec3&) { return std::vector<double>{0.0}; }});
    return ex;
  }

  if (name == "saddle") {
    detail::allow_only(name, params, {"a"});
    const double a = detail::param(params, "a", 1.0);
    if (!(a > 0.0)) fail(ErrorCode::ParameterOutOfRange, "a must be positive, got ", a);
    ex.parameters["a"] = a;
    ex.ambient = MetricField::from_functor<2>("euclidean3", Box3{{{-5, -5, -5}}, {{5, 5, 5}}}, models::Euclidean3{});
    ex.connection = SurfaceConnection::immersion(
        SurfacePatch::from_functor(name, Box2{{{-1, -1}}, {{1, 1}}}, models::SaddlePatch{a}), *ex.ambient);
    auto K = [a](const Vec2& q) {
      double d = 1.0 + a * a * (q[0] * q[0] + q[1] * q[1]);
      return -a * a / (d * d);
    };
    Probe p = surface_probe(*ex.connection, detail::surface_grid(-0.8, 0.8, -0.8, 0.8, 9), K, 0.0);
    // In Euclidean space det B = K_I.
    p.expected = [K](const Vec3& x) {
      double k = K(detail::surface_point(x));
      return std::vector<double>{k, k, 0.0, 0.0, 0.0};
    };
    ex.probes.push_back(std::move(p));
    return ex;
  }

  if (name == "constant_k_surface") {
    detail::allow_only(name, params, {"K"});
    const double K = detail::param(params, "K", -1.0);
    if (K == 0.0) fail(ErrorCode::ParameterOutOfRange, "K = 0 gives a degenerate shape operator");
    ex.parameters["K"] = K;
    ex.ambient = MetricField::from_functor<2>("euclidean3", Box3{{{-50, -50, -50}}, {{50, 50, 50}}}, models::Euclidean3{});
    std::vector<Vec3> grid;
    if (K < 0.0) {
      ex.connection = SurfaceConnection::immersion(
          SurfacePatch::from_functor("pseudosphere", Box2{{{0.2, -4}}, {{3, 4}}}, models::PseudospherePatch{1.0 / std::sqrt(-K)}),
          *ex.ambient);
      grid = detail::surface_grid(0.4, 2.5, -3, 3, 7);
    } else {
      ex.connection = SurfaceConnection::immersion(
          SurfacePatch::from_functor("sphere", Box2{{{0.2, -3.5}}, {{2.9, 3.5}}}, models::RoundSpherePatch{1.0 / std::sqrt(K), {}}),
          *ex.ambient);
      grid = detail::surface_grid(0.4, 2.7, -3, 3, 7);
    }
    Probe p = surface_probe(*ex.connection, grid, [K](const Vec2&) { return K; }, K);
    const SurfaceConnection c = *ex.connection;
    auto base = p.measure;
    p.fields.push_back("K_tilde");
    p.tolerances.push_back(1e-8);
    p.measure = [base, c](const Vec3& x) {
      auto v = base(x);
      v.push_back(c.curvature(detail::surface_point(x)));
      return v;
    };
    p.expected = [K](const Vec3&) { return std::vector<double>{K, K, 0.0, 0.0, 0.0, 1.0}; };
    ex.probes.push_back(std::move(p));
    return ex;
  }

  fail(ErrorCode::InvalidArgument, "unknown example '", name, "'");
}

struct VerifyOptions {
  std::map<std::string, std::vector<Vec3>> grids;  // per-probe grid overrides
  double tolerance_scale = 1.0;
};

// Runs every probe on its grid and reports the largest deviation per field.
// A point where the pipeline throws counts as an infinite deviation.
inline VerificationReport verify_example(const ExampleCase& ex, const VerifyOptions& opt = {}) {
  VerificationReport rep;
  rep.example = ex.name;
  rep.parameters = ex.parameters;
  for (const Probe& p : ex.probes) {
    auto it = opt.grids.find(p.name);
    const std::vector<Vec3>& grid = it == opt.grids.end() ? p.grid : it->second;
    const std::size_t n = p.fields.size();
    auto errs = parallel_map(grid.size(), [&](std::size_t i) {
      std::vector<double> e(n, std::numeric_limits<double>::infinity());
      try {
        auto m = p.measure(grid[i]);
        auto x = p.expected(grid[i]);
        for (std::size_t k = 0; k < n; ++k) {
          double d = std::abs(m[k] - x[k]);
          e[k] = std::isfinite(d) ? d : std::numeric_limits<double>::infinity();
        }
      } catch (const Error&) {
      }
      return e;
    });
    for (std::size_t k = 0; k < n; ++k) {
      FieldResult f;
      f.name = p.fields[k];
      f.tolerance = p.tolerances[k] * opt.tolerance_scale;
      f.points = grid.size();
      for (const auto& e : errs) f.max_abs_err = std::max(f.max_abs_err, e[k]);
      f.pass = f.max_abs_err < f.tolerance;
      rep.fields.push_back(f);
    }
  }
  return rep;
}

// tau^2 / K^m for the deformed hyperbolic connection, with K^m the smallest
// measured curvature over the radii. The connection form gives
// K_t = t coth(r) - 1, whose infimum t - 1 is approached as r grows.
struct LandscapeRow {
  double t = 0.0;
  double torsion = 0.0;  // measured |tau|
  double k_min = 0.0;    // over the sampled radii
  double k_max = 0.0;
  double ratio = 0.0;    // torsion^2 / k_min, NaN when k_min <= 0
};

inline std::vector<LandscapeRow> deformed_landscape(const std::vector<double>& ts, double r_lo = 0.5, double r_hi = 6.0,
                                                    int samples = 56) {
  std::vector<LandscapeRow> rows;
  for (double t : ts) {
    ExampleCase ex = build_example("hyperbolic_deformed", {{"t", t}});
    const SurfaceConnection& c = *ex.connection;
    LandscapeRow row;
    row.t = t;
    row.k_min = std::numeric_limits<double>::infinity();
    row.k_max = -std::numeric_limits<double>::infinity();
    for (double r : detail::linspace(r_lo, r_hi - 1e-9, samples)) {
      Vec2 q{{r, 0.0}};
      double K = c.frame_curvature(q);
      row.k_min = std::min(row.k_min, K);
      row.k_max = std::max(row.k_max, K);
      row.torsion = std::max(row.torsion, torsion_norm(c.at(q)));
    }
    row.ratio = row.k_min > 0.0 ? row.torsion * row.torsion / row.k_min : std::nan("");
    rows.push_back(row);
  }
  return rows;
}

// ---- virtual third fundamental form ----

struct VirtualThirdForm {
  SurfaceMetric sigma;
  EndomorphismField H;
  ScalarField2 b;
  TangentField tau;
  SurfaceConnection data;  // III with the torsion of H^-1 nabla (H .), abstract mode
};

struct VirtualPoint {
  Vec2 q;
  Mat2 III;
  double K_sigma = 0.0;
  double K_tilde = 0.0;           // curvature of H^-1 nabla (H .)
  double K_expected = 0.0;        // -K_sigma / b
  Vec2 torsion;                   // T(f1, f2), f III-orthonormal and positive
  double torsion_norm = 0.0;      // in III
  double torsion_expected = 0.0;  // |tau|_sigma / b
  double det_residual = 0.0;      // |det H + b|
  double codazzi_residual = 0.0;  // |d^nabla H - tau (x) nu_sigma|, sigma-orthonormal arguments
  double b = 0.0;
};

struct VirtualReport {
  std::vector<VirtualPoint> points;
  double max_K_err = 0.0;
  double max_torsion_err = 0.0;
  double max_det_residual = 0.0;
  double max_codazzi_residual = 0.0;
  double b_m = 0.0, b_M = 0.0;
  double tau0 = 0.0;       // sup |tau|_sigma
  double eps0 = 0.0;       // -sup K_sigma
  bool hypothesis = false; // b_M tau0^2 < 4 eps0 b_m^2
};

namespace detail {

// (d^nabla H)(d_1, d_2) for the Levi-Civita connection of sigma.
inline Vec2 exterior_derivative(const Jet<Mat2, 2>& s, const Jet<Mat2, 2>& H) {
  ChristoffelSymbols<double, 2> G = christoffel_symbols<double, 2>(s.value, s.d);
  Vec2 r;
  for (int c = 0; c < 2; ++c) {
    double v = H.d[0](c, 1) - H.d[1](c, 0);
    for (int m = 0; m < 2; ++m) v += G[c](0, m) * H.value(m, 1) - G[c](1, m) * H.value(m, 0);
    r[c] = v;
  }
  return r;
}

// Coefficients of H^-1 nabla (H .) carrying first derivatives.
inline ChristoffelSymbols<D1<2>, 2> virtual_coefficients(const Jet<Mat2, 2>& s, const Jet<Mat2, 2>& H) {
  using A1 = D1<2>;
  Mat<D2<2>, 2> s2 = lift2(s), H2 = lift2(H);
  Mat<A1, 2> s1 = lower_mat(s2), H1 = lower_mat(H2), Hi = inverse(H1);
  ChristoffelSymbols<A1, 2> G = christoffel_symbols<A1, 2>(s1, {diff_mat(s2, 0), diff_mat(s2, 1)});
  std::array<Mat<A1, 2>, 2> dH{diff_mat(H2, 0), diff_mat(H2, 1)};
  ChristoffelSymbols<A1, 2> T;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      Vec<A1, 2> w;  // nabla_i (H d_j)
      for (int c = 0; c < 2; ++c) {
        A1 v = dH[i](c, j);
        for (int m = 0; m < 2; ++m) v += G[c](i, m) * H1(m, j);
        w[c] = v;
      }
      Vec<A1, 2> x = Hi * w;
      for (int k = 0; k < 2; ++k) T[k](i, j) = x[k];
    }
  return T;
}

inline double gauss_curvature(const Jet<Mat2, 2>& s) {
  RiemannTensor<2> R = riemann_from_jet<2>(s);
  return R(0, 1, 1, 0) / det(s.value);
}

}  // namespace detail

// tau with d^nabla H = tau (x) nu_sigma, so the second equation of the
// system holds by construction.
inline TangentField codazzi_torsion(const SurfaceMetric& sigma, const EndomorphismField& H) {
  return TangentField("codazzi_torsion(" + H.name() + ")", H.box(), [sigma, H](const Vec2& q) {
    Jet<Mat2, 2> s = sigma.jet(q, 1), h = H.jet(q, 1);
    return detail::exterior_derivative(s, h) / std::sqrt(det(s.value));
  });
}

// III = sigma(H., H.) with the connection H^-1 nabla (H .). Requires
// det H < 0 and b > 0 at every sample point.
inline VirtualThirdForm virtual_third_form(SurfaceMetric sigma, EndomorphismField H, ScalarField2 b, TangentField tau,
                                           const std::vector<Vec2>& samples = {}) {
  for (const Vec2& q : samples) {
    double d = det(H(q)), bq = b(q);
    if (!(d < 0.0)) fail(ErrorCode::WrongSignDeterminant, "det H = ", d, " at ", format_point(q));
    if (!(bq > 0.0)) fail(ErrorCode::WrongSignDeterminant, "b = ", bq, " at ", format_point(q), "; det H = -b needs b > 0");
  }
  SurfaceMetric III("III", sigma.box(), [sigma, H](const Vec2& q) {
    Mat2 h = H(q);
    return transpose(h) * sigma(q) * h;
  });
  TangentField ttilde("torsion_tilde", sigma.box(), [sigma, H](const Vec2& q) {
    auto G = detail::virtual_coefficients(sigma.jet(q, 2), H.jet(q, 2));
    ChristoffelSymbols<double, 2> g;
    for (int k = 0; k < 2; ++k) g[k] = lower_mat(G[k]);
    Mat2 h = H(q);
    return torsion_from_coefficients(g, transpose(h) * sigma(q) * h);
  });
  SurfaceConnection data = SurfaceConnection::abstract(III, ttilde);
  return VirtualThirdForm{std::move(sigma), std::move(H), std::move(b), std::move(tau), std::move(data)};
}

inline VirtualPoint virtual_point(const VirtualThirdForm& v, const Vec2& q) {
  Jet<Mat2, 2> s = v.sigma.jet(q, 2), h = v.H.jet(q, 2);
  auto G = detail::virtual_coefficients(s, h);
  VirtualPoint p;
  p.q = q;
  p.b = v.b(q);
  p.III = transpose(h.value) * s.value * h.value;
  ChristoffelSymbols<double, 2> g;
  for (int k = 0; k < 2; ++k) g[k] = lower_mat(G[k]);
  RiemannTensor<2> R = riemann_from_christoffel<2>(p.III, G);
  p.K_tilde = R(0, 1, 1, 0) / det(p.III);
  p.K_sigma = detail::gauss_curvature(s);
  p.K_expected = -p.K_sigma / p.b;
  p.torsion = torsion_from_coefficients(g, p.III);
  p.torsion_norm = metric_norm(p.III, p.torsion);
  Vec2 t = v.tau(q);
  p.torsion_expected = metric_norm(s.value, t) / p.b;
  p.det_residual = std::abs(det(h.value) + p.b);
  double vol = std::sqrt(det(s.value));
  p.codazzi_residual = metric_norm(s.value, detail::exterior_derivative(s, h) - t * vol) / vol;
  return p;
}

inline VirtualReport virtual_report(const VirtualThirdForm& v, const std::vector<Vec2>& samples) {
  VirtualReport r;
  r.points = parallel_map(samples.size(), [&](std::size_t i) { return virtual_point(v, samples[i]); });
  r.b_m = std::numeric_limits<double>::infinity();
  r.b_M = 0.0;
  double Ksup = -std::numeric_limits<double>::infinity();
  for (const auto& p : r.points) {
    r.max_K_err = std::max(r.max_K_err, std::abs(p.K_tilde - p.K_expected));
    r.max_torsion_err = std::max(r.max_torsion_err, std::abs(p.torsion_norm - p.torsion_expected));
    r.max_det_residual = std::max(r.max_det_residual, p.det_residual);
    r.max_codazzi_residual = std::max(r.max_codazzi_residual, p.codazzi_residual);
    r.b_m = std::min(r.b_m, p.b);
    r.b_M = std::max(r.b_M, p.b);
    r.tau0 = std::max(r.tau0, p.torsion_expected * p.b);
    Ksup = std::max(Ksup, p.K_sigma);
  }
  r.eps0 = -Ksup;
  r.hypothesis = r.eps0 > 0.0 && r.b_M * r.tau0 * r.tau0 < 4.0 * r.eps0 * r.b_m * r.b_m;
  return r;
}

}  // namespace efimov

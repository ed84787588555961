#pragma once
// Command-line front end. Every subcommand prints a report (text, or JSON
// with --json) and returns 0 when all its checks pass, 1 when one fails or
// the computation breaks down, 2 on usage and configuration errors.

#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "efimov/asymptotics.hpp"
#include "efimov/core/expression.hpp"
#include "efimov/curves.hpp"
#include "efimov/gallery.hpp"
#include "efimov/metric_file.hpp"
#include "efimov/odelab.hpp"
#include "efimov/report.hpp"

namespace efimov::cli {

namespace detail {

inline int exit_code(ErrorCode c) {
  switch (c) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::InvalidPinching:
    case ErrorCode::ParameterOutOfRange:
    case ErrorCode::ParseError:
    case ErrorCode::ModeUnsupported:
    case ErrorCode::WrongSignDeterminant: return 2;
    default: return 1;
  }
}

inline std::vector<double> parse_list(const std::string& s, std::size_t n, const char* what) {
  std::vector<double> v;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    char* end = nullptr;
    std::string t = efimov::detail::trim(item);
    double x = std::strtod(t.c_str(), &end);
    if (t.empty() || *end != '\0') fail(ErrorCode::ParseError, what, ": '", item, "' is not a number");
    v.push_back(x);
  }
  if (v.size() != n) fail(ErrorCode::ParseError, what, " needs ", n, " comma-separated numbers, got '", s, "'");
  return v;
}

inline Vec2 parse_vec2(const std::string& s, const char* what) {
  auto v = parse_list(s, 2, what);
  return Vec2{{v[0], v[1]}};
}

inline std::map<std::string, double> parse_params(const std::vector<std::string>& items) {
  std::map<std::string, double> out;
  for (const auto& it : items) {
    auto eq = it.find('=');
    if (eq == std::string::npos) fail(ErrorCode::ParseError, "--param expects key=value, got '", it, "'");
    out[efimov::detail::trim(it.substr(0, eq))] = parse_list(it.substr(eq + 1), 1, "--param")[0];
  }
  return out;
}

inline std::string read_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) fail(ErrorCode::InvalidArgument, "cannot open '", path, "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

template <class W>
void write_file(const std::string& path, const W& write) {
  std::ofstream f(path);
  if (!f) fail(ErrorCode::InvalidArgument, "cannot write '", path, "'");
  write(f);
}

// u given as a number or an expression in s (x is accepted as an alias).
inline ScalarProfile parse_profile(const std::string& text) {
  Expression e = Expression::parse(text, {"s", "x"});
  return ScalarProfile{[e](double s) {
    const double x[2] = {s, s};
    return e.eval(x);
  }};
}

inline void add_params(ConfigDigest& d, const std::map<std::string, double>& p) {
  for (const auto& [k, v] : p) d.add("param." + k, v);
}

inline ExampleCase surface_example(const std::string& name, const std::map<std::string, double>& params) {
  ExampleCase ex = build_example(name, params);
  if (!ex.connection) fail(ErrorCode::InvalidArgument, "example '", name, "' has no surface connection");
  return ex;
}

// Grid spec: "n" (n points per axis over the box), "nx,ny,nz", or
// "u0:u1:n,v0:v1:n,w0:w1:n".
inline std::vector<Vec3> parse_grid(const std::string& spec, const Box3& box) {
  std::vector<std::string> parts;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) parts.push_back(efimov::detail::trim(item));
  if (parts.size() == 1) parts = {parts[0], parts[0], parts[0]};
  if (parts.size() != 3) fail(ErrorCode::ParseError, "grid spec '", spec, "' needs one or three axes");
  std::array<std::vector<double>, 3> axes;
  for (int i = 0; i < 3; ++i) {
    const std::string& p = parts[static_cast<std::size_t>(i)];
    double a = box.lo[i], b = box.hi[i];
    std::string count = p;
    if (p.find(':') != std::string::npos) {
      std::stringstream ps(p);
      std::string x0, x1;
      std::getline(ps, x0, ':');
      std::getline(ps, x1, ':');
      std::getline(ps, count);
      a = parse_list(x0, 1, "grid")[0];
      b = parse_list(x1, 1, "grid")[0];
    }
    double n = parse_list(count, 1, "grid")[0];
    if (!(n >= 1 && n <= 1000 && n == std::floor(n))) fail(ErrorCode::ParseError, "grid count '", count, "'");
    axes[static_cast<std::size_t>(i)] = efimov::detail::linspace(a, b, static_cast<int>(n));
  }
  return efimov::detail::grid3(axes[0], axes[1], axes[2]);
}

inline RegionSpec parse_region(const std::string& text, const SurfaceConnection& c) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::ParseError, "region file: ", e.what());
  }
  auto vec = [&](const char* key) {
    if (!j.contains(key) || !j[key].is_array() || j[key].size() != 2)
      fail(ErrorCode::ParseError, "region file: '", key, "' must be a pair of numbers");
    return Vec2{{j[key][0].get<double>(), j[key][1].get<double>()}};
  };
  auto num = [&](const char* key, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_number()) fail(ErrorCode::ParseError, "region file: '", key, "' must be a number");
    return j[key].get<double>();
  };
  std::string type = j.value("type", "");
  RegionSpec r;
  if (type == "circle") {
    r = circle_region(vec("center"), num("radius", 0.0));
    if (!(num("radius", 0.0) > 0.0)) fail(ErrorCode::ParseError, "region file: radius must be positive");
  } else if (type == "geodesic_polygon") {
    if (!j.contains("sides") || !j["sides"].is_array()) fail(ErrorCode::ParseError, "region file: 'sides' missing");
    std::vector<PolygonSide> sides;
    for (const auto& s : j["sides"]) sides.push_back({s.at("length").get<double>(), s.at("turn").get<double>()});
    r = geodesic_polygon(c, vec("start"), vec("direction"), sides, num("step", 1e-3));
  } else {
    fail(ErrorCode::ParseError, "region file: type must be 'circle' or 'geodesic_polygon'");
  }
  r.radial_nodes = static_cast<int>(num("radial_nodes", r.radial_nodes));
  r.angular_nodes = static_cast<int>(num("angular_nodes", r.angular_nodes));
  r.closure_tol = num("closure_tol", r.closure_tol);
  return r;
}

struct Options {
  bool json = false;
  // surfaces and traces
  std::string example;
  std::vector<std::string> params;
  std::string start, dir = "1,0", vector;
  double length = 1.0, step = 1e-3;
  std::string csv;
  // check-hypothesis
  double k1 = 0, k2 = 0, k3 = 0;
  // curvature-report
  std::string metric, grid = "5";
  bool fd = false;
  // jacobi
  double x0 = 0.0, y0 = 0.0, dy0 = 1.0, K = 1.0, tau_x = 0.0, tau_y = 0.0;
  // gauss-bonnet
  std::string region;
  double tol = 1e-4, holonomy_tol = 1e-3;
  // asymptotic, net-check
  std::string which = "U";
  double lu = 0.1, lv = 0.1;
  int nu = 4, nv = 4;
  // edo, edo7
  std::string u;
  double eps = 1.0, origin = 0.0, search_limit = 0.0, n1 = 1.0;
  int mollifiers = 50;
  // example verify
  std::string name;
  double tolerance_scale = 1.0;
};

inline Vec2 unit_direction(const SurfaceConnection& c, const Vec2& q, const Vec2& d) {
  double n = metric_norm(c.at(q).metric, d);
  if (!(n > 0.0)) fail(ErrorCode::InvalidArgument, "direction has zero length");
  return d / n;
}

// ---- subcommands ----

inline ReportDocument check_hypothesis_cmd(const Options& o) {
  ReportDocument doc;
  doc.digest = ConfigDigest("check-hypothesis").add("k1", o.k1).add("k2", o.k2).add("k3", o.k3).hex();
  HypothesisVerdict v = check_hypothesis(o.k1, o.k2, o.k3);
  doc.results = to_json(v);
  // The strict inequality forces 4 K4 > tau0^2.
  if (v.admissible) doc.check_flag("excluded_implies_sit", !v.excluded || v.sit_check);
  doc.check_flag("margin_consistent", v.margin == v.rhs - v.lhs && v.excluded == (v.admissible && v.margin > 0.0));
  return doc;
}

inline ReportDocument curvature_report_cmd(const Options& o) {
  ConfigDigest dg("curvature-report");
  MetricField m;
  auto params = parse_params(o.params);
  bool is_file = o.metric.find('/') != std::string::npos || o.metric.find('.') != std::string::npos;
  if (is_file) {
    std::string text = read_file(o.metric);
    m = parse_metric_text(text, o.metric);
    dg.add("metric_text", text);
  } else {
    ExampleCase ex = build_example(o.metric, params);
    if (!ex.ambient) fail(ErrorCode::InvalidArgument, "example '", o.metric, "' has no ambient metric");
    m = *ex.ambient;
    dg.add("metric", o.metric);
    add_params(dg, params);
  }
  if (o.fd) m.set_mode(DerivativeMode::FiniteDifference).set_step(1e-3).set_richardson(true);
  dg.add("grid", o.grid).add("fd", o.fd ? "1" : "0");
  std::vector<Vec3> grid = parse_grid(o.grid, m.box());
  auto rows = parallel_map(grid.size(), [&](std::size_t i) {
    CurvatureSample s = curvature_sample(m, grid[i]);
    auto e = frame_entries(s.riemann, s.metric);
    return std::vector<double>{grid[i][0], grid[i][1], grid[i][2], s.k_min, s.k_max,
                               e[0], e[1], e[2], e[3], e[4], e[5], symmetry_residual(s.riemann)};
  });
  double lo = INFINITY, hi = -INFINITY, sym = 0.0;
  for (const auto& r : rows) {
    lo = std::min(lo, r[3]);
    hi = std::max(hi, r[4]);
    sym = std::max(sym, r[11]);
  }
  ReportDocument doc;
  doc.digest = dg.hex();
  doc.results = Json{{"metric", m.name()}, {"points", grid.size()}, {"k_min", number(lo)}, {"k_max", number(hi)},
                     {"derivatives", m.mode() == DerivativeMode::Analytic ? "analytic" : "finite_difference"}};
  doc.check_below("symmetry_residual", sym, 1e-8);
  if (!o.csv.empty())
    write_file(o.csv, [&](std::ostream& f) {
      write_csv(f, {"u", "v", "w", "k_min", "k_max", "K_12", "K_13", "K_23", "R_1213", "R_2123", "R_3132", "symmetry"},
                rows);
    });
  return doc;
}

inline ConfigDigest trace_digest(const char* cmd, const Options& o, const std::map<std::string, double>& params) {
  ConfigDigest d(cmd);
  d.add("example", o.example).add("start", o.start).add("dir", o.dir).add("length", o.length).add("step", o.step);
  add_params(d, params);
  return d;
}

inline ReportDocument geodesic_cmd(const Options& o) {
  auto params = parse_params(o.params);
  ExampleCase ex = surface_example(o.example, params);
  const SurfaceConnection& c = *ex.connection;
  Vec2 q = parse_vec2(o.start, "--start");
  CurveTrace tr = integrate_geodesic(c, q, unit_direction(c, q, parse_vec2(o.dir, "--dir")), o.length, o.step);
  double drift = 0.0;
  for (const auto& s : tr.samples) drift = std::max(drift, std::abs(metric_norm(c.at(s.point).metric, s.velocity) - 1.0));
  ReportDocument doc;
  doc.digest = trace_digest("geodesic", o, params).hex();
  doc.results = Json{{"example", o.example}, {"samples", tr.samples.size()}, {"length", number(tr.length)},
                     {"end", vec_json(tr.back().point)}, {"end_velocity", vec_json(tr.back().velocity)},
                     {"status", tr.complete() ? "complete" : "left_patch"}};
  if (!tr.complete()) doc.results["message"] = tr.message;
  doc.check_flag("complete", tr.complete());
  doc.check_below("speed_drift", drift, 1e-6);
  if (!o.csv.empty()) write_file(o.csv, [&](std::ostream& f) { write_trace_csv(f, tr); });
  return doc;
}

inline ReportDocument transport_cmd(const Options& o) {
  auto params = parse_params(o.params);
  ExampleCase ex = surface_example(o.example, params);
  const SurfaceConnection& c = *ex.connection;
  Vec2 q = parse_vec2(o.start, "--start");
  Vec2 v = unit_direction(c, q, parse_vec2(o.dir, "--dir"));
  Vec2 w = o.vector.empty() ? v : parse_vec2(o.vector, "--vector");
  CurveTrace tr = integrate_geodesic(c, q, v, o.length, o.step);
  TransportResult t = parallel_transport(c, tr, w);
  ConnectionPoint end = c.at(tr.back().point);
  ReportDocument doc;
  doc.digest = trace_digest("transport", o, params).add("vector", o.vector).hex();
  doc.results = Json{{"example", o.example},
                     {"samples", tr.samples.size()},
                     {"end", vec_json(tr.back().point)},
                     {"vector", vec_json(t.vector)},
                     {"angle_to_velocity", number(std::atan2(form(end.metric, end.J * tr.back().velocity, t.vector),
                                                             form(end.metric, tr.back().velocity, t.vector)))},
                     {"norm_drift", number(t.norm_drift)}};
  doc.check_flag("complete", tr.complete());
  doc.check_below("norm_drift", t.norm_drift, 1e-8);
  if (!o.csv.empty())
    write_file(o.csv, [&](std::ostream& f) {
      std::vector<std::vector<double>> rows;
      for (std::size_t i = 0; i < tr.samples.size(); ++i)
        rows.push_back({tr.samples[i].s, tr.samples[i].point[0], tr.samples[i].point[1], t.history[i][0], t.history[i][1]});
      write_csv(f, {"s", "u", "v", "w1", "w2"}, rows);
    });
  return doc;
}

// Along a geodesic of --example, or with constant coefficients --K,
// --tau-x, --tau-y when no example is given.
inline ReportDocument jacobi_cmd(const Options& o) {
  auto params = parse_params(o.params);
  JacobiTrace tr;
  ConfigDigest dg("jacobi");
  dg.add("x0", o.x0).add("y0", o.y0).add("dy0", o.dy0).add("length", o.length).add("step", o.step);
  bool constant = o.example.empty();
  if (constant) {
    dg.add("K", o.K).add("tau_x", o.tau_x).add("tau_y", o.tau_y);
    JacobiCoefficients k{[&](double) { return o.K; }, [&](double) { return o.tau_x; }, [&](double) { return o.tau_y; }};
    tr = jacobi_field(k, o.length, o.x0, o.y0, o.y0 * o.tau_x, o.dy0, o.step);
  } else {
    dg = trace_digest("jacobi", o, params);
    dg.add("x0", o.x0).add("y0", o.y0).add("dy0", o.dy0);
    ExampleCase ex = surface_example(o.example, params);
    const SurfaceConnection& c = *ex.connection;
    Vec2 q = parse_vec2(o.start, "--start");
    CurveTrace base = integrate_geodesic(c, q, unit_direction(c, q, parse_vec2(o.dir, "--dir")), o.length, o.step);
    if (!base.complete()) fail(ErrorCode::LeftPatch, "base geodesic: ", base.message);
    ConnectionPoint cp = c.at(q);
    double tau_x0 = form(cp.metric, cp.torsion, base.front().velocity);
    tr = jacobi_field(c, base, o.x0, o.y0, o.y0 * tau_x0, o.dy0, o.step);
  }
  ReportDocument doc;
  doc.digest = dg.hex();
  const JacobiSample& last = tr.samples.back();
  doc.results = Json{{"samples", tr.samples.size()}, {"t_end", number(last.t)}, {"x_end", number(last.x)},
                     {"y_end", number(last.y)},      {"tau0", number(tr.tau0)}, {"t_g", number(tr.t_g)},
                     {"x_bound", tr.x_bound},        {"x_residual", number(tr.x_residual)}};
  doc.check_below("x_residual", tr.x_residual, 1e-8);
  if (constant && o.tau_x == 0.0 && o.tau_y == 0.0 && o.K > 0.0) {
    const double w = std::sqrt(o.K);
    double err = 0.0;
    for (const auto& s : tr.samples)
      err = std::max(err, std::abs(s.y - (o.y0 * std::cos(w * s.t) + o.dy0 * std::sin(w * s.t) / w)));
    doc.results["closed_form_error"] = number(err);
    doc.check_below("closed_form", err, 1e-8);
  }
  if (!o.csv.empty())
    write_file(o.csv, [&](std::ostream& f) {
      std::vector<std::vector<double>> rows;
      for (const auto& s : tr.samples) rows.push_back({s.t, s.x, s.y, s.dx, s.dy, s.K, s.tau_x, s.tau_y});
      write_csv(f, {"t", "x", "y", "dx", "dy", "K", "tau_x", "tau_y"}, rows);
    });
  return doc;
}

inline ReportDocument gauss_bonnet_cmd(const Options& o) {
  auto params = parse_params(o.params);
  ExampleCase ex = surface_example(o.example, params);
  const SurfaceConnection& c = *ex.connection;
  std::string text = read_file(o.region);
  RegionSpec region = parse_region(text, c);
  GaussBonnetReport gb = gauss_bonnet(c, region);
  HolonomyReport hol = holonomy(c, region);
  ConfigDigest dg("gauss-bonnet");
  dg.add("example", o.example).add("region", text).add("tol", o.tol).add("holonomy_tol", o.holonomy_tol);
  add_params(dg, params);
  ReportDocument doc;
  doc.digest = dg.hex();
  doc.results = to_json(gb);
  doc.results["holonomy_angle"] = number(hol.angle);
  doc.results["holonomy_mismatch"] = number(hol.mismatch);
  doc.check_below("residual", gb.residual, o.tol);
  doc.check_below("holonomy_mismatch", hol.mismatch, o.holonomy_tol);
  return doc;
}

inline ReportDocument asymptotic_cmd(const Options& o) {
  auto params = parse_params(o.params);
  if (o.which != "U" && o.which != "V") fail(ErrorCode::InvalidArgument, "--which must be U or V");
  ExampleCase ex = surface_example(o.example, params);
  const SurfaceConnection& c = *ex.connection;
  Vec2 q = parse_vec2(o.start, "--start");
  AsymptoticTrace tr = trace_asymptotic(c, q, o.which == "U" ? Direction::U : Direction::V, o.length, o.step);
  AsymptoticFrame f = asymptotic_frame(c, q);
  FrameResiduals fr = frame_residuals(c, f);
  CovariantRates rates = covariant_rate_check(c, q);
  ConfigDigest dg = trace_digest("asymptotic", o, params);
  dg.add("which", o.which);
  ReportDocument doc;
  doc.digest = dg.hex();
  doc.results = Json{{"example", o.example},
                     {"which", o.which},
                     {"samples", tr.curve.samples.size()},
                     {"length", number(tr.curve.length)},
                     {"end", vec_json(tr.curve.back().point)},
                     {"theta_start", number(f.theta)},
                     {"k_start", number(f.k)},
                     {"delta", number(tr.delta)},
                     {"sigma", number(tr.sigma)},
                     {"quasi_defect", number(tr.quasi_defect)},
                     {"rate_residual_V_U", number(rates.residual_V_U)},
                     {"rate_residual_U_V", number(rates.residual_U_V)},
                     {"rate_residual_V_U_ln_k", number(rates.residual_V_U_ln_k)},
                     {"rate_residual_U_V_ln_k", number(rates.residual_U_V_ln_k)}};
  doc.check_flag("complete", tr.curve.complete());
  doc.check_below("frame_residual",
                  std::max({fr.eigen_U, fr.eigen_V, fr.unit, fr.k_det, fr.norm_I}), 1e-8);
  doc.check_below("covariant_rates", std::max(rates.residual_V_U_ln_k, rates.residual_U_V_ln_k), 1e-6);
  if (!o.csv.empty())
    write_file(o.csv, [&](std::ostream& f2) {
      std::vector<std::vector<double>> rows;
      for (const auto& s : tr.samples) rows.push_back({s.s, s.point[0], s.point[1], s.theta, s.frame.k});
      write_csv(f2, {"s", "u", "v", "theta", "k"}, rows);
    });
  return doc;
}

inline ReportDocument net_check_cmd(const Options& o) {
  auto params = parse_params(o.params);
  ExampleCase ex = surface_example(o.example, params);
  Vec2 q = parse_vec2(o.start, "--start");
  NetReport r = net_expansion_check(*ex.connection, q, o.lu, o.lv, o.nu, o.nv, o.step);
  judge(r, o.tol);
  ConfigDigest dg("net-check");
  dg.add("example", o.example).add("start", o.start).add("lu", o.lu).add("lv", o.lv).add("nu", o.nu).add("nv", o.nv);
  dg.add("step", o.step).add("tol", o.tol);
  add_params(dg, params);
  ReportDocument doc;
  doc.digest = dg.hex();
  doc.results = Json{{"example", o.example},          {"tau0", number(r.tau0)},
                     {"tau1", number(r.tau1)},          {"bound", number(r.bound)},
                     {"sup_du_alpha", number(r.sup_du_alpha)}, {"sup_dv_beta", number(r.sup_dv_beta)},
                     {"sup_dL_dv", number(r.sup_dL_dv)}, {"dL_bound", number(r.dL_bound)}};
  doc.check_flag("alpha", r.alpha_ok);
  doc.check_flag("beta", r.beta_ok);
  doc.check_flag("length", r.length_ok);
  return doc;
}

inline ReportDocument edo_cmd(const Options& o) {
  ScalarProfile u = parse_profile(o.u);
  EdoSolution sol = solve_prop_edo(u, o.eps, o.step, o.origin, o.search_limit);
  ReportDocument doc;
  doc.digest = ConfigDigest("edo")
                   .add("u", o.u)
                   .add("eps", o.eps)
                   .add("step", o.step)
                   .add("origin", o.origin)
                   .add("search_limit", o.search_limit)
                   .hex();
  doc.results = to_json(sol);
  doc.results["envelope"] = number(edo_envelope(o.eps));
  doc.check_below("M0_envelope", sol.M0, edo_envelope(o.eps));
  doc.check_flag("z_decreasing", sol.z_decreasing);
  doc.check_below("time_bound", sol.s1, sol.S1);
  if (!o.csv.empty()) write_file(o.csv, [&](std::ostream& f) { write_edo_csv(f, sol); });
  return doc;
}

inline ReportDocument edo7_cmd(const Options& o) {
  ScalarProfile u = parse_profile(o.u);
  Edo7Solution sol = construct_edo7(u, o.eps, o.n1, o.step, o.search_limit);
  double worst = INFINITY;
  for (const Mollifier& m : mollifier_family(sol, o.mollifiers)) worst = std::min(worst, weak_residual(sol, u, m));
  ReportDocument doc;
  doc.digest = ConfigDigest("edo7")
                   .add("u", o.u)
                   .add("eps", o.eps)
                   .add("n1", o.n1)
                   .add("step", o.step)
                   .add("mollifiers", o.mollifiers)
                   .add("search_limit", o.search_limit)
                   .hex();
  doc.results = to_json(sol);
  doc.results["weak_residual_min"] = number(worst);
  doc.check_flag("support", sol.support_ok);
  doc.check_flag("floor", sol.floor_ok);
  doc.check_flag("lipschitz", sol.lipschitz_ok);
  doc.check_flag("range", sol.range_ok);
  doc.checks.push_back({"weak_inequality", number(worst), -1e-6, worst >= -1e-6});
  if (!o.csv.empty())
    write_file(o.csv, [&](std::ostream& f) {
      std::vector<std::vector<double>> rows;
      for (const auto& p : sol.pieces)
        for (std::size_t i = 0; i < p.x.size(); ++i) rows.push_back({p.x[i], p.y[i], p.dy[i]});
      write_csv(f, {"x", "y", "dy"}, rows);
    });
  return doc;
}

inline ReportDocument example_verify_cmd(const Options& o) {
  auto params = parse_params(o.params);
  VerifyOptions vo;
  vo.tolerance_scale = o.tolerance_scale;
  VerificationReport rep = verify_example(build_example(o.name, params), vo);
  ConfigDigest dg("example verify");
  dg.add("name", o.name).add("tolerance_scale", o.tolerance_scale);
  add_params(dg, params);
  ReportDocument doc;
  doc.digest = dg.hex();
  doc.results = to_json(rep);
  for (const auto& f : rep.fields) doc.check_below(f.name, f.max_abs_err, f.tolerance);
  return doc;
}

inline const std::vector<std::string>& example_names() {
  static const std::vector<std::string> names{"euclidean3",      "sphere3",        "hyperbolic3", "g_lambda",
                                              "hyperbolic_deformed", "clifford_torus", "saddle",  "constant_k_surface"};
  return names;
}

}  // namespace detail

inline std::string command_echo(int argc, const char* const* argv) {
  std::string s = "efimov_lab";
  for (int i = 1; i < argc; ++i) s += std::string(" ") + argv[i];
  return s;
}

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  using detail::Options;
  Options o;
  CLI::App app{"Numerical checks for surfaces in 3-manifolds, their dual connections and torsion bounds.",
               "efimov_lab"};
  app.require_subcommand(1);
  std::map<CLI::App*, std::function<ReportDocument(const Options&)>> handlers;

  auto json_flag = [&](CLI::App* s) { s->add_flag("--json", o.json, "JSON report on standard output"); };
  auto surface_opts = [&](CLI::App* s, bool required) {
    auto* e = s->add_option("--example", o.example, "gallery example providing the surface");
    if (required) e->required();
    s->add_option("--param", o.params, "example parameter key=value (repeatable)")->allow_extra_args(false);
  };
  auto trace_opts = [&](CLI::App* s, bool need_start) {
    auto* st = s->add_option("--start", o.start, "start point u,v");
    if (need_start) st->required();
    s->add_option("--dir", o.dir, "initial direction a,b (rescaled to unit speed)");
    s->add_option("--length", o.length, "arclength")->required();
    s->add_option("--step", o.step, "integration step");
    s->add_option("--csv", o.csv, "write the trace to this CSV file");
  };

  auto* ch = app.add_subcommand("check-hypothesis", "pinching inequality, torsion bound and curvature bounds");
  ch->add_option("--k1", o.k1, "K1 < 0")->required()->allow_extra_args(false);
  ch->add_option("--k2", o.k2, "K2")->required();
  ch->add_option("--k3", o.k3, "K3 >= K2")->required();
  json_flag(ch);
  handlers[ch] = detail::check_hypothesis_cmd;

  auto* cr = app.add_subcommand("curvature-report", "sectional curvatures of an ambient metric on a grid");
  cr->add_option("--metric", o.metric, "example name or metric file")->required();
  cr->add_option("--param", o.params, "example parameter key=value (repeatable)")->allow_extra_args(false);
  cr->add_option("--grid", o.grid, "n | nx,ny,nz | u0:u1:n,v0:v1:n,w0:w1:n");
  cr->add_flag("--fd", o.fd, "finite differences (h = 1e-3, one Richardson step) instead of exact jets");
  cr->add_option("--csv", o.csv, "write the per-point values to this CSV file");
  json_flag(cr);
  handlers[cr] = detail::curvature_report_cmd;

  auto* geo = app.add_subcommand("geodesic", "geodesic of the dual connection");
  surface_opts(geo, true);
  trace_opts(geo, true);
  json_flag(geo);
  handlers[geo] = detail::geodesic_cmd;

  auto* tp = app.add_subcommand("transport", "parallel transport along a geodesic");
  surface_opts(tp, true);
  trace_opts(tp, true);
  tp->add_option("--vector", o.vector, "vector to transport (default: the initial velocity)");
  json_flag(tp);
  handlers[tp] = detail::transport_cmd;

  auto* jc = app.add_subcommand("jacobi", "Jacobi field along a geodesic, or with constant coefficients");
  surface_opts(jc, false);
  trace_opts(jc, false);
  jc->add_option("--x0", o.x0, "x(0)");
  jc->add_option("--y0", o.y0, "y(0)");
  jc->add_option("--dy0", o.dy0, "y'(0)");
  jc->add_option("--K", o.K, "constant curvature (no --example)");
  jc->add_option("--tau-x", o.tau_x, "constant tau_x (no --example)");
  jc->add_option("--tau-y", o.tau_y, "constant tau_y (no --example)");
  json_flag(jc);
  handlers[jc] = [](const Options& op) {
    if (!op.example.empty() && op.start.empty()) fail(ErrorCode::InvalidArgument, "--example needs --start");
    return detail::jacobi_cmd(op);
  };

  auto* gb = app.add_subcommand("gauss-bonnet", "Gauss-Bonnet residual and holonomy of a region");
  surface_opts(gb, true);
  gb->add_option("--region", o.region, "JSON region file (circle or geodesic_polygon)")->required();
  gb->add_option("--tol", o.tol, "residual tolerance");
  gb->add_option("--holonomy-tol", o.holonomy_tol, "holonomy tolerance");
  json_flag(gb);
  handlers[gb] = detail::gauss_bonnet_cmd;

  auto* as = app.add_subcommand("asymptotic", "asymptotic curve with frame and rate checks");
  surface_opts(as, true);
  trace_opts(as, true);
  as->add_option("--which", o.which, "U or V");
  json_flag(as);
  handlers[as] = detail::asymptotic_cmd;

  auto* ed = app.add_subcommand("edo", "y' = y u + z, z' = -(eps + u^2/4) y from (1, 4)");
  ed->add_option("--u", o.u, "profile: number or expression in s")->required();
  ed->add_option("--eps", o.eps, "eps > 0")->required();
  ed->add_option("--step", o.step, "RK4 step");
  ed->add_option("--origin", o.origin, "profile offset");
  ed->add_option("--search-limit", o.search_limit, "largest s searched for the zero (0: default)");
  ed->add_option("--csv", o.csv, "write s, y, z to this CSV file");
  json_flag(ed);
  handlers[ed] = detail::edo_cmd;

  auto* e7 = app.add_subcommand("edo7", "piecewise supersolution on [-N1, N1] with the weak-form test");
  e7->add_option("--u", o.u, "profile: number or expression in x")->required();
  e7->add_option("--eps", o.eps, "eps > 0")->required();
  e7->add_option("--n1", o.n1, "half width N1 > 0")->required();
  e7->add_option("--step", o.step, "RK4 step");
  e7->add_option("--mollifiers", o.mollifiers, "number of test bumps");
  e7->add_option("--search-limit", o.search_limit, "largest segment length searched (0: default)");
  e7->add_option("--csv", o.csv, "write x, y, y' to this CSV file");
  json_flag(e7);
  handlers[e7] = detail::edo7_cmd;

  auto* ex = app.add_subcommand("example", "gallery examples");
  ex->require_subcommand(1);
  auto* ev = ex->add_subcommand("verify", "check an example against its closed-form reference fields");
  ev->add_option("name", o.name, "example name")->required();
  ev->add_option("--param", o.params, "parameter key=value (repeatable)")->allow_extra_args(false);
  ev->add_option("--tolerance-scale", o.tolerance_scale, "multiplies every tolerance");
  json_flag(ev);
  handlers[ev] = detail::example_verify_cmd;
  auto* el = ex->add_subcommand("list", "example names");
  json_flag(el);
  handlers[el] = [](const Options&) {
    ReportDocument doc;
    doc.digest = ConfigDigest("example list").hex();
    doc.results = Json{{"examples", detail::example_names()}};
    return doc;
  };

  auto* nc = app.add_subcommand("net-check", "expansion of the asymptotic net");
  surface_opts(nc, true);
  nc->add_option("--start", o.start, "corner u,v")->required();
  nc->add_option("--lu", o.lu, "length along U");
  nc->add_option("--lv", o.lv, "length along V");
  nc->add_option("--nu", o.nu, "grid intervals along U");
  nc->add_option("--nv", o.nv, "grid intervals along V");
  nc->add_option("--step", o.step, "integration step");
  nc->add_option("--tol", o.tol, "slack on the finite-difference ratios");
  json_flag(nc);
  handlers[nc] = detail::net_check_cmd;

  // --tol defaults differ between gauss-bonnet and net-check.
  nc->parse_complete_callback([&] {
    if (nc->count("--tol") == 0) o.tol = 1e-3;
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  CLI::App* chosen = nullptr;
  for (auto& [sub, fn] : handlers)
    if (sub->parsed()) chosen = sub;
  if (!chosen) {
    err << "no subcommand given\n";
    return 2;
  }
  ReportDocument doc;
  try {
    doc = handlers[chosen](o);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return detail::exit_code(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  doc.command = command_echo(argc, argv);
  if (o.json)
    out << doc.to_json().dump(2) << "\n";
  else
    doc.write_text(out);
  return doc.pass() ? 0 : 1;
}

}  // namespace efimov::cli

#pragma once
// Metrics written as text, one coefficient per line:
//
//   # comment
//   l = 0.5                            named constant
//   box = -1 1 -1 1 -0.1 0.1           u0 u1 v0 v1 w0 w1
//   g11 = (1 + 2*l*w) * cosh(v)^2 * cosh(w)^2
//   g22 = (1 - 2*l*w) * cosh(w)^2
//   g33 = 1
//
// Variables are u, v, w. Off-diagonal entries default to 0 and g21, g31,
// g32 are accepted for their transposes. Constants may use earlier ones.

#include <array>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <string>

#include "efimov/ambient.hpp"
#include "efimov/core/expression.hpp"

namespace efimov {

namespace detail {

struct ExpressionMetric {
  std::shared_ptr<const std::array<Expression, 6>> g;  // 11 12 13 22 23 33

  template <class T>
  Mat<T, 3> operator()(const Vec<T, 3>& p) const {
    const T x[3] = {p[0], p[1], p[2]};
    static constexpr int idx[6][2] = {{0, 0}, {0, 1}, {0, 2}, {1, 1}, {1, 2}, {2, 2}};
    Mat<T, 3> m;
    for (int k = 0; k < 6; ++k) {
      T v = (*g)[static_cast<std::size_t>(k)].eval(x);
      m(idx[k][0], idx[k][1]) = v;
      m(idx[k][1], idx[k][0]) = v;
    }
    return m;
  }
};

inline std::string trim(const std::string& s) {
  auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

inline int metric_slot(const std::string& key) {
  static const std::map<std::string, int> slots{{"g11", 0}, {"g12", 1}, {"g21", 1}, {"g13", 2}, {"g31", 2},
                                                {"g22", 3}, {"g23", 4}, {"g32", 4}, {"g33", 5}};
  auto it = slots.find(key);
  return it == slots.end() ? -1 : it->second;
}

}  // namespace detail

inline MetricField parse_metric_text(const std::string& text, const std::string& name = "file") {
  std::map<std::string, double> constants;
  std::array<std::string, 6> src{"", "0", "0", "", "0", ""};
  std::array<bool, 6> seen{};
  bool have_box = false;
  Box3 box{};
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) fail(ErrorCode::ParseError, name, ":", lineno, ": expected 'key = value'");
    std::string key = detail::trim(line.substr(0, eq)), rhs = detail::trim(line.substr(eq + 1));
    if (key == "box") {
      std::istringstream b(rhs);
      std::array<double, 6> v{};
      for (double& x : v)
        if (!(b >> x)) fail(ErrorCode::ParseError, name, ":", lineno, ": box needs six numbers");
      std::string extra;
      if (b >> extra) fail(ErrorCode::ParseError, name, ":", lineno, ": trailing text after the box");
      for (int i = 0; i < 3; ++i) {
        if (!(v[2 * i] < v[2 * i + 1])) fail(ErrorCode::ParseError, name, ":", lineno, ": empty box side");
        box.lo[i] = v[2 * i];
        box.hi[i] = v[2 * i + 1];
      }
      have_box = true;
    } else if (int slot = detail::metric_slot(key); slot >= 0) {
      if (seen[static_cast<std::size_t>(slot)]) fail(ErrorCode::ParseError, name, ":", lineno, ": ", key, " given twice");
      seen[static_cast<std::size_t>(slot)] = true;
      src[static_cast<std::size_t>(slot)] = rhs;
    } else {
      if (key == "u" || key == "v" || key == "w" || key == "pi")
        fail(ErrorCode::ParseError, name, ":", lineno, ": '", key, "' is reserved");
      Expression e = Expression::parse(rhs, {}, constants);
      constants[key] = e.eval<double>(nullptr);
    }
  }
  if (!have_box) fail(ErrorCode::ParseError, name, ": missing 'box = u0 u1 v0 v1 w0 w1'");
  for (int k : {0, 3, 5})
    if (!seen[static_cast<std::size_t>(k)]) fail(ErrorCode::ParseError, name, ": missing diagonal entry");
  auto exprs = std::make_shared<std::array<Expression, 6>>();
  for (std::size_t k = 0; k < 6; ++k) (*exprs)[k] = Expression::parse(src[k], {"u", "v", "w"}, constants);
  return MetricField::from_functor<2>(name, box, detail::ExpressionMetric{exprs});
}

inline MetricField load_metric_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) fail(ErrorCode::InvalidArgument, "cannot open metric file '", path, "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_metric_text(ss.str(), path);
}

}  // namespace efimov

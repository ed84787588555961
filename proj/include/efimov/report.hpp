#pragma once
// Machine-readable output: JSON documents, CSV traces and input digests.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "efimov/connection.hpp"
#include "efimov/curves.hpp"
#include "efimov/gallery.hpp"
#include "efimov/odelab.hpp"

namespace efimov {

using Json = nlohmann::ordered_json;

// 17 significant digits: a double survives the round trip through text.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Non-finite values become null; JSON has no spelling for them.
inline Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

inline Json vec_json(const Vec2& v) { return Json::array({number(v[0]), number(v[1])}); }

inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

// Canonical form of a run configuration: the command followed by sorted
// key=value lines, with numbers at full precision.
class ConfigDigest {
 public:
  explicit ConfigDigest(std::string command) : command_(std::move(command)) {}

  ConfigDigest& add(const std::string& key, double v) { return add(key, format_double(v)); }
  ConfigDigest& add(const std::string& key, const std::string& v) {
    kv_[key] = v;
    return *this;
  }

  std::string canonical() const {
    std::string s = command_ + "\n";
    for (const auto& [k, v] : kv_) s += k + "=" + v + "\n";
    return s;
  }
  std::string hex() const {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(canonical())));
    return buf;
  }

 private:
  std::string command_;
  std::map<std::string, std::string> kv_;
};

struct Check {
  std::string name;
  Json value;
  std::optional<double> tolerance;
  bool pass = false;
};

// One run: what was asked, the digest of the inputs, results and checks.
struct ReportDocument {
  std::string command;
  std::string digest;
  Json results = Json::object();
  std::vector<Check> checks;

  bool pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }

  // `value <= tolerance` passes; NaN never does.
  void check_below(const std::string& name, double value, double tol) {
    checks.push_back({name, number(value), tol, value <= tol});
  }
  void check_flag(const std::string& name, bool ok) { checks.push_back({name, ok, std::nullopt, ok}); }

  Json to_json() const {
    Json j;
    j["command"] = command;
    j["config_digest"] = digest;
    j["results"] = results;
    Json cs = Json::array();
    for (const auto& c : checks) {
      Json e;
      e["name"] = c.name;
      e["value"] = c.value;
      e["tolerance"] = c.tolerance ? number(*c.tolerance) : Json(nullptr);
      e["pass"] = c.pass;
      cs.push_back(std::move(e));
    }
    j["checks"] = std::move(cs);
    j["pass"] = pass();
    return j;
  }

  void write_text(std::ostream& os) const {
    os << command << "  [" << digest << "]\n";
    for (const auto& [k, v] : results.items()) {
      if (v.is_object()) continue;
      if (!v.is_array()) {
        os << "  " << k << " = " << scalar_text(v) << "\n";
      } else if (v.size() <= 16 && std::none_of(v.begin(), v.end(), [](const Json& x) { return x.is_structured(); })) {
        os << "  " << k << " =";
        for (const auto& x : v) os << " " << (x.is_string() ? x.get<std::string>() : scalar_text(x));
        os << "\n";
      }
    }
    for (const auto& c : checks) {
      os << "  " << (c.pass ? "PASS " : "FAIL ") << c.name << " = " << scalar_text(c.value);
      if (c.tolerance) os << " (tol " << *c.tolerance << ")";
      os << "\n";
    }
    os << (pass() ? "PASS" : "FAIL") << "\n";
  }

 private:
  static std::string scalar_text(const Json& v) {
    if (v.is_number_float()) return format_double(v.get<double>());
    if (v.is_null()) return "nan";
    return v.dump();
  }
};

// ---- CSV ----

inline void write_csv(std::ostream& os, const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& rows) {
  for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
  os << "\n";
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << format_double(r[i]);
    os << "\n";
  }
}

inline void write_trace_csv(std::ostream& os, const CurveTrace& tr) {
  std::vector<std::vector<double>> rows;
  for (const auto& s : tr.samples) rows.push_back({s.s, s.point[0], s.point[1], s.velocity[0], s.velocity[1]});
  write_csv(os, {"s", "u", "v", "du", "dv"}, rows);
}

inline void write_edo_csv(std::ostream& os, const EdoSolution& sol) {
  std::vector<std::vector<double>> rows;
  for (const auto& s : sol.samples) rows.push_back({s.s, s.y, s.z});
  write_csv(os, {"s", "y", "z"}, rows);
}

// ---- library results ----

inline Json to_json(const VerificationReport& r) {
  Json j;
  j["example"] = r.example;
  Json p = Json::object();
  for (const auto& [k, v] : r.parameters) p[k] = number(v);
  j["parameters"] = std::move(p);
  Json fs = Json::array();
  for (const auto& f : r.fields)
    fs.push_back(Json{{"name", f.name}, {"max_abs_err", number(f.max_abs_err)}, {"tolerance", number(f.tolerance)},
                      {"pass", f.pass}});
  j["fields"] = std::move(fs);
  return j;
}

inline Json to_json(const HypothesisVerdict& v) {
  return Json{{"K1", number(v.K1)},
              {"K2", number(v.K2)},
              {"K3", number(v.K3)},
              {"regime", to_string(v.regime)},
              {"lhs", number(v.lhs)},
              {"rhs", number(v.rhs)},
              {"margin", number(v.margin)},
              {"excluded", v.excluded},
              {"admissible", v.admissible},
              {"regimes_agree", v.regimes_agree},
              {"tau0", number(v.tau0)},
              {"K4", number(v.K4)},
              {"K5", number(v.K5)},
              {"sit_check", v.sit_check},
              {"th1_cond0", v.th1_cond0},
              {"th1_tau0", v.th1_tau0}};
}

// Header of an edo run; the samples go to CSV.
inline Json to_json(const EdoSolution& s) {
  return Json{{"epsilon", number(s.epsilon)}, {"step", number(s.step)},         {"s0", number(s.s0)},
              {"s1", number(s.s1)},           {"S1", number(s.S1)},             {"M0", number(s.M0)},
              {"lipschitz", number(s.lipschitz)}, {"y_max", number(s.y_max)},   {"z_decreasing", s.z_decreasing},
              {"samples", s.samples.size()}};
}

inline Json to_json(const Edo7Solution& s) {
  Json junctions = Json::array();
  for (double x : s.junctions) junctions.push_back(number(x));
  return Json{{"epsilon", number(s.epsilon)},   {"N1", number(s.N1)},           {"S1", number(s.S1)},
              {"M1", number(s.M1)},             {"support_lo", number(s.support_lo())},
              {"support_hi", number(s.support_hi())}, {"floor", number(s.floor)}, {"y_max", number(s.y_max)},
              {"lipschitz", number(s.lipschitz)}, {"junctions", std::move(junctions)}};
}

inline Json to_json(const GaussBonnetReport& r) {
  Json ext = Json::array();
  for (double a : r.exterior_angles) ext.push_back(number(a));
  return Json{{"curvature_integral", number(r.curvature_integral)},
              {"boundary_integral", number(r.boundary_integral)},
              {"corner_sum", number(r.corner_sum)},
              {"area", number(r.area)},
              {"closure_gap", number(r.closure_gap)},
              {"residual", number(r.residual)},
              {"exterior_angles", std::move(ext)}};
}

}  // namespace efimov

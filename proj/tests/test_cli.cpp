#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "efimov/cli.hpp"

using namespace efimov;

namespace {

struct Result {
  int code = 0;
  std::string out, err;
  Json json() const { return Json::parse(out); }
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "efimov_lab");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Result r;
  r.code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string temp_file(const std::string& name, const std::string& content) {
  std::string path = ::testing::TempDir() + name;
  std::ofstream(path) << content;
  return path;
}

std::vector<std::vector<double>> read_csv(const std::string& path, std::string& header) {
  std::ifstream f(path);
  std::getline(f, header);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(f, line)) {
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::strtod(cell.c_str(), nullptr));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

TEST(Cli, EfimovTripleIsExcluded) {
  auto r = run({"check-hypothesis", "--k1", "-1", "--k2", "0", "--k3", "0", "--json"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto j = r.json();
  EXPECT_TRUE(j["results"]["excluded"].get<bool>());
  EXPECT_EQ(j["results"]["margin"].get<double>(), 16.0);
  EXPECT_TRUE(j["pass"].get<bool>());
}

// The pinching triple of g_lambda sits outside the excluded range.
TEST(Cli, GLambdaTriplesAreNotExcluded) {
  for (double l : {1.0, 2.0, 3.0, 5.0}) {
    auto s = [](double x) { return format_double(x); };
    auto r = run({"check-hypothesis", "--k1", "-1", "--k2", s(l * l - 1 - 2 * l), "--k3", s(l * l - 1 + 2 * l), "--json"});
    ASSERT_EQ(r.code, 0) << r.err;
    auto j = r.json()["results"];
    EXPECT_EQ(j["lhs"].get<double>(), 16 * l * l);
    EXPECT_EQ(j["rhs"].get<double>(), 16 * l * l - 32 * l);
    EXPECT_FALSE(j["excluded"].get<bool>());
  }
}

TEST(Cli, InvalidPinchingIsAConfigError) {
  auto r = run({"check-hypothesis", "--k1", "1", "--k2", "0", "--k3", "0"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("InvalidPinching"), std::string::npos);
}

TEST(Cli, ExampleVerifyGLambda) {
  auto r = run({"example", "verify", "g_lambda", "--param", "lambda=1", "--json"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto j = r.json()["results"];
  EXPECT_EQ(j["example"], "g_lambda");
  ASSERT_EQ(j["fields"].size(), 6u);
  for (const auto& f : j["fields"]) {
    EXPECT_TRUE(f["pass"].get<bool>()) << f.dump();
    EXPECT_EQ(f["tolerance"].get<double>(), 1e-3);
  }
}

TEST(Cli, ExampleVerifyReportsFailuresWithExitOne) {
  auto r = run({"example", "verify", "hyperbolic_deformed", "--param", "t=2", "--json"});
  EXPECT_EQ(r.code, 1);
  auto j = r.json();
  EXPECT_FALSE(j["pass"].get<bool>());
  for (const auto& c : j["checks"])
    if (c["name"] == "curvature_coth" || c["name"] == "torsion_norm") EXPECT_TRUE(c["pass"].get<bool>());
}

// y = cos s + 4 sin s: returns to 1 at 2 atan 4, vanishes at pi - atan(1/4).
TEST(Cli, EdoZeroProfile) {
  std::string csv = ::testing::TempDir() + "edo.csv";
  auto r = run({"edo", "--u", "0", "--eps", "1", "--step", "1e-4", "--json", "--csv", csv});
  ASSERT_EQ(r.code, 0) << r.err;
  auto j = r.json()["results"];
  EXPECT_NEAR(j["s0"].get<double>(), 2.0 * std::atan(4.0), 1e-6);
  EXPECT_NEAR(j["s1"].get<double>(), M_PI - std::atan(0.25), 1e-6);
  EXPECT_NEAR(j["s0"].get<double>(), 2.651635, 1e-6);
  EXPECT_NEAR(j["s1"].get<double>(), 2.896614, 1e-6);
  std::string header;
  auto rows = read_csv(csv, header);
  EXPECT_EQ(header, "s,y,z");
  ASSERT_GT(rows.size(), 1000u);
  for (const auto& row : rows) {
    ASSERT_EQ(row.size(), 3u);
    EXPECT_NEAR(row[1], std::cos(row[0]) + 4 * std::sin(row[0]), 1e-9);
  }
}

TEST(Cli, EdoTimeBoundFailsForVaryingProfile) {
  auto r = run({"edo", "--u", "-cos(s)", "--eps", "1", "--search-limit", "20", "--json"});
  EXPECT_EQ(r.code, 1);
  for (const auto& c : r.json()["checks"])
    EXPECT_EQ(c["pass"].get<bool>(), c["name"] != "time_bound") << c.dump();
}

TEST(Cli, Edo7PassesTheWeakTest) {
  auto r = run({"edo7", "--u", "0", "--eps", "1", "--n1", "1", "--mollifiers", "50", "--json"});
  ASSERT_EQ(r.code, 0) << r.out << r.err;
  EXPECT_GE(r.json()["results"]["weak_residual_min"].get<double>(), -1e-6);
}

TEST(Cli, CsvKeepsSeventeenDigits) {
  std::string csv = ::testing::TempDir() + "geo.csv";
  auto r = run({"geodesic", "--example", "hyperbolic_deformed", "--param", "t=1", "--start", "1,0.3", "--dir", "1,1",
                "--length", "0.5", "--csv", csv});
  ASSERT_EQ(r.code, 0) << r.err;
  std::ifstream f(csv);
  std::string header, line;
  std::getline(f, header);
  EXPECT_EQ(header, "s,u,v,du,dv");
  std::getline(f, line);
  std::getline(f, line);
  std::string cell = line.substr(line.find(',') + 1);
  cell = cell.substr(0, cell.find(','));
  double u = std::strtod(cell.c_str(), nullptr);
  EXPECT_EQ(format_double(u), cell);
  EXPECT_EQ(line.find(';'), std::string::npos);
}

TEST(Cli, ReportsAreDeterministic) {
  std::vector<std::string> args{"curvature-report", "--metric", "g_lambda", "--param", "lambda=2", "--grid", "4", "--json"};
  setenv("EFIMOV_LAB_THREADS", "1", 1);
  auto a = run(args);
  setenv("EFIMOV_LAB_THREADS", "3", 1);
  auto b = run(args);
  unsetenv("EFIMOV_LAB_THREADS");
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
}

TEST(Cli, DigestFollowsTheInputsNotTheirOrder) {
  auto d = [](std::vector<std::string> args) { return run(args).json()["config_digest"].get<std::string>(); };
  auto a = d({"edo", "--u", "0", "--eps", "1", "--json"});
  auto b = d({"edo", "--json", "--eps", "1.0", "--u", "0"});
  auto c = d({"edo", "--u", "0", "--eps", "0.5", "--json"});
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
  EXPECT_EQ(a.size(), 16u);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"check-hypothesis", "--k1", "-1", "--k2", "0", "--k3", "0", "--bogus"}).code, 2);
  EXPECT_EQ(run({"edo", "--u", "0"}).code, 2);
  EXPECT_EQ(run({"frobnicate"}).code, 2);
  EXPECT_EQ(run({"example", "verify", "torus"}).code, 2);
  EXPECT_EQ(run({"geodesic", "--example", "saddle", "--start", "0.1", "--length", "1"}).code, 2);
  EXPECT_EQ(run({"asymptotic", "--example", "hyperbolic_deformed", "--start", "1,0", "--length", "1"}).code, 2);
}

TEST(Cli, HelpListsEverySubcommand) {
  auto r = run({"--help"});
  EXPECT_EQ(r.code, 0);
  for (const char* s : {"check-hypothesis", "curvature-report", "geodesic", "transport", "jacobi", "gauss-bonnet",
                        "asymptotic", "edo", "edo7", "example", "net-check"})
    EXPECT_NE(r.out.find(s), std::string::npos) << s;
}

TEST(Cli, EverySubcommandSpeaksJson) {
  std::string disk = temp_file("disk.json", R"({"type": "circle", "center": [1.2, 0.4], "radius": 0.5})");
  std::vector<std::vector<std::string>> runs{
      {"check-hypothesis", "--k1", "-1", "--k2", "-0.5", "--k3", "0.5"},
      {"curvature-report", "--metric", "hyperbolic3", "--grid", "2"},
      {"geodesic", "--example", "saddle", "--start", "0,0", "--length", "0.5"},
      {"transport", "--example", "saddle", "--start", "0,0", "--length", "0.5", "--vector", "0,1"},
      {"jacobi", "--length", "1"},
      {"gauss-bonnet", "--example", "hyperbolic_deformed", "--param", "t=0", "--region", disk},
      {"asymptotic", "--example", "saddle", "--start", "0.1,0.1", "--length", "0.3"},
      {"edo", "--u", "0.5", "--eps", "1"},
      {"edo7", "--u", "0", "--eps", "1", "--n1", "0.5"},
      {"example", "verify", "clifford_torus"},
      {"example", "list"},
      {"net-check", "--example", "saddle", "--start", "0.05,0.05"}};
  for (auto args : runs) {
    args.push_back("--json");
    auto r = run(args);
    EXPECT_EQ(r.code, 0) << args[0] << " " << r.err << r.out;
    auto j = r.json();
    EXPECT_TRUE(j.contains("config_digest"));
    EXPECT_TRUE(j["pass"].get<bool>()) << args[0];
  }
}

TEST(Cli, MetricFileMatchesTheBuiltInMetric) {
  std::string path = temp_file("glambda.metric",
                               "# g_lambda\nl = 2\nbox = -1 1 -1 1 -0.1 0.1\n"
                               "g11 = (1 + 2*l*w) * cosh(v)^2 * cosh(w)^2\ng22 = (1 - 2*l*w) * cosh(w)^2\ng33 = 1\n");
  auto f = run({"curvature-report", "--metric", path, "--grid", "-1:1:3,-1:1:3,0:0:1", "--json"});
  auto b = run({"curvature-report", "--metric", "g_lambda", "--param", "lambda=2", "--grid", "-1:1:3,-1:1:3,0:0:1", "--json"});
  ASSERT_EQ(f.code, 0) << f.err;
  ASSERT_EQ(b.code, 0) << b.err;
  EXPECT_NEAR(f.json()["results"]["k_min"].get<double>(), b.json()["results"]["k_min"].get<double>(), 1e-12);
  EXPECT_NEAR(f.json()["results"]["k_max"].get<double>(), b.json()["results"]["k_max"].get<double>(), 1e-12);
}

TEST(Cli, MetricFileErrors) {
  std::string zero = temp_file("zero.metric", "box = -1 1 -1 1 -1 1\ng11 = 1/u\ng22 = 1\ng33 = 1\n");
  auto r = run({"curvature-report", "--metric", zero, "--grid", "3"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("division by zero"), std::string::npos);
  EXPECT_NE(r.err.find("u=0"), std::string::npos);
  std::string bad = temp_file("bad.metric", "box = -1 1 -1 1\ng11 = 1\n");
  EXPECT_EQ(run({"curvature-report", "--metric", bad}).code, 2);
  std::string nodiag = temp_file("nodiag.metric", "box = -1 1 -1 1 -1 1\ng11 = 1\ng22 = 1\n");
  EXPECT_EQ(run({"curvature-report", "--metric", nodiag}).code, 2);
}

// An octant of the unit sphere, rotated so that it stays clear of the poles
// of the chart: three right angles and area pi/2.
TEST(Cli, GeodesicPolygonRegion) {
  std::string tri = temp_file("octant.json", R"({"type": "geodesic_polygon",
      "start": [2.186276035465284, -0.7853981633974483],
      "direction": [0.25881904510252074, 1.1830127018922194], "step": 1e-3,
      "sides": [{"length": 1.5707963267948966, "turn": 1.5707963267948966},
                {"length": 1.5707963267948966, "turn": 1.5707963267948966},
                {"length": 1.5707963267948966, "turn": 1.5707963267948966}]})");
  auto r = run({"gauss-bonnet", "--example", "constant_k_surface", "--param", "K=1", "--region", tri, "--json"});
  ASSERT_EQ(r.code, 0) << r.err << r.out;
  auto j = r.json()["results"];
  EXPECT_NEAR(j["area"].get<double>(), M_PI / 2, 1e-4);
  EXPECT_NEAR(j["curvature_integral"].get<double>(), M_PI / 2, 1e-4);
  EXPECT_NEAR(j["corner_sum"].get<double>(), 3 * M_PI / 2, 1e-6);
}

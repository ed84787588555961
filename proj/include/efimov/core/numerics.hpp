#pragma once
// Integration and quadrature helpers shared by the modules.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <functional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "efimov/core/error.hpp"
#include "efimov/core/linalg.hpp"

namespace efimov {

// One classical Runge-Kutta step for y' = f(s, y).
template <class Y, class F>
Y rk4_step(const F& f, double s, const Y& y, double h) {
  Y k1 = f(s, y);
  Y k2 = f(s + 0.5 * h, y + k1 * (0.5 * h));
  Y k3 = f(s + 0.5 * h, y + k2 * (0.5 * h));
  Y k4 = f(s + h, y + k3 * h);
  return y + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
}

// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussRule {
  std::vector<double> x;
  std::vector<double> w;
};

inline GaussRule gauss_legendre(int n) {
  if (n < 1) fail(ErrorCode::InvalidArgument, "quadrature needs at least one node");
  GaussRule r;
  r.x.resize(static_cast<std::size_t>(n));
  r.w.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int k = 1; k <= n; ++k) {
        double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
      double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    double w = 2.0 / ((1.0 - z * z) * dp * dp);
    r.x[static_cast<std::size_t>(i)] = -z;
    r.x[static_cast<std::size_t>(n - 1 - i)] = z;
    r.w[static_cast<std::size_t>(i)] = w;
    r.w[static_cast<std::size_t>(n - 1 - i)] = w;
  }
  return r;
}

// Cubic Hermite interpolation on [0, h] with t in [0, 1].
template <class Y>
Y hermite(const Y& y0, const Y& d0, const Y& y1, const Y& d1, double h, double t) {
  double t2 = t * t, t3 = t2 * t;
  return y0 * (2 * t3 - 3 * t2 + 1) + d0 * (h * (t3 - 2 * t2 + t)) + y1 * (-2 * t3 + 3 * t2) + d1 * (h * (t3 - t2));
}
template <class Y>
Y hermite_derivative(const Y& y0, const Y& d0, const Y& y1, const Y& d1, double h, double t) {
  double t2 = t * t;
  return y0 * ((6 * t2 - 6 * t) / h) + d0 * (3 * t2 - 4 * t + 1) + y1 * ((-6 * t2 + 6 * t) / h) + d1 * (3 * t2 - 2 * t);
}

// Worker count from EFIMOV_LAB_THREADS, default the hardware concurrency.
inline int thread_count() {
  const char* env = std::getenv("EFIMOV_LAB_THREADS");
  if (!env || !*env) return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  int n = std::atoi(env);
  return std::clamp(n, 1, 256);
}

// Evaluates f(0..n-1) and returns the results in index order, so the
// outcome does not depend on the thread count.
template <class F>
auto parallel_map(std::size_t n, const F& f) {
  using R = decltype(f(std::size_t{0}));
  std::vector<R> out(n);
  int threads = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(thread_count()), n));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) out[i] = f(i);
    return out;
  }
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(threads));
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&, t] {
      try {
        for (std::size_t i = static_cast<std::size_t>(t); i < n; i += static_cast<std::size_t>(threads)) out[i] = f(i);
      } catch (...) {
        errors[static_cast<std::size_t>(t)] = std::current_exception();
      }
    });
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

}  // namespace efimov

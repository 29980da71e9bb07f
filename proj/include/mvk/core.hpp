#pragma once
// Shared basics: error types, the rectangular parameter domain, deterministic
// reductions, and the thread helper used by per-node field loops.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace mvk {

inline constexpr const char* kVersion = "mvklab 0.1.0";

// Invalid parameters or inputs (bad config keys, inadmissible grids or
// material constants). The CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A computation went numerically wrong (singular geometry, non-finite energy,
// diverged line search). The CLI maps this to exit code 3.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Axis-aligned rectangle; the midsurface parameter domain.
struct Rect {
  double x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;
  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  double area() const { return width() * height(); }
};

// ---------------------------------------------------------------------------
// Deterministic reduction. All quadrature and norm computations sum buffers
// laid out in node order through this, so totals do not depend on how many
// threads filled the buffer.

inline double pairwise_sum(const double* p, std::size_t n) {
  if (n <= 16) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += p[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(p, half) + pairwise_sum(p + half, n - half);
}

inline double pairwise_sum(const std::vector<double>& v) {
  return pairwise_sum(v.data(), v.size());
}

namespace detail {
inline int& thread_count_ref() {
  static int n = 1;
  return n;
}
}  // namespace detail

inline void set_thread_count(int n) {
  if (n < 1) throw ConfigError("thread count must be >= 1");
  detail::thread_count_ref() = n;
}

inline int thread_count() { return detail::thread_count_ref(); }

// Runs fn(begin, end) over a partition of [0, n). Callers only write to
// disjoint output slots indexed by the loop variable, which keeps results
// bit-identical for any thread count. The first exception thrown by a worker
// (lowest chunk wins, so failures are deterministic too) is rethrown here.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  const int nt = thread_count();
  if (nt <= 1 || n < 4096) {
    fn(std::size_t{0}, n);
    return;
  }
  const std::size_t chunk = (n + nt - 1) / nt;
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errs(static_cast<std::size_t>(nt));
  pool.reserve(static_cast<std::size_t>(nt));
  for (int t = 0; t < nt; ++t) {
    const std::size_t b = std::min(n, static_cast<std::size_t>(t) * chunk);
    const std::size_t e = std::min(n, b + chunk);
    if (b == e) break;
    pool.emplace_back([&fn, &err = errs[static_cast<std::size_t>(t)], b, e] {
      try {
        fn(b, e);
      } catch (...) {
        err = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& err : errs)
    if (err) std::rethrow_exception(err);
}

// log2-style observed convergence order between two consecutive errors.
inline double observed_order(double err_coarse, double err_fine, double step_ratio) {
  return std::log(err_coarse / err_fine) / std::log(step_ratio);
}

// Seeded random source for tables and probes. The engine is the standard
// mt19937_64 (its output sequence is pinned by the standard); the
// distributions are spelled out here because the library ones are
// implementation-defined, and reports must be bit-reproducible everywhere.
struct Rng {
  std::mt19937_64 engine;

  explicit Rng(std::uint64_t seed) : engine(seed) {}

  // uniform in [0, 1) with 53 random bits
  double uniform() { return static_cast<double>(engine() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  // standard normal via Box-Muller (one value per call; the pair's partner
  // is discarded to keep the call sequence simple and reproducible)
  double gaussian() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }
};

}  // namespace mvk

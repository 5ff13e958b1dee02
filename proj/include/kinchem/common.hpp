#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace kinchem {

inline constexpr double pi = std::numbers::pi;

class InvalidArgument : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Time step exceeds the positivity bound of the explicit upwind scheme.
class CflViolation : public std::runtime_error {
public:
  CflViolation(double dt, double dt_max)
      : std::runtime_error("CFL violation: dt=" + std::to_string(dt) +
                           " exceeds stable bound " + std::to_string(dt_max)),
        dt_(dt), dt_max_(dt_max) {}
  double dt() const { return dt_; }
  double dt_max() const { return dt_max_; }

private:
  double dt_;
  double dt_max_;
};

/// Quadrature non-convergence, non-finite values, and similar failures.
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend constexpr bool operator==(Vec2, Vec2) = default;
};

constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }

struct Mat2 {
  double xx = 0.0, xy = 0.0, yx = 0.0, yy = 0.0;
};

constexpr double positive_part(double a) { return a > 0.0 ? a : 0.0; }
constexpr double negative_part(double a) { return a < 0.0 ? -a : 0.0; }

/// Fixed-order pairwise summation. The tree shape depends only on the length,
/// so results are reproducible regardless of how the terms were produced.
inline double pairwise_sum(std::span<const double> v) {
  constexpr std::size_t block = 16;
  if (v.size() <= block) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

namespace detail {
inline std::size_t& thread_setting() {
  static std::size_t n = 1;
  return n;
}
}  // namespace detail

inline void set_threads(std::size_t n) { detail::thread_setting() = std::max<std::size_t>(1, n); }
inline std::size_t threads() { return detail::thread_setting(); }

/// Runs f(i) for i in [0, n) over contiguous static chunks. Each index is
/// processed by exactly one worker, so any f that only writes slot i gives
/// bit-identical output for every thread count.
template <class F>
void parallel_for(std::size_t n, F&& f) {
  const std::size_t workers = std::min(threads(), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(workers - 1);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 1; w < workers; ++w) {
    const std::size_t lo = w * chunk;
    const std::size_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &f] {
      for (std::size_t i = lo; i < hi; ++i) f(i);
    });
  }
  for (std::size_t i = 0; i < std::min(n, chunk); ++i) f(i);
}

}  // namespace kinchem

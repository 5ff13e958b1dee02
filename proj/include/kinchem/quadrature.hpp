#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>
#include <vector>

#include "kinchem/common.hpp"

namespace kinchem::quad {

struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss-Legendre rule on [-1, 1] by Newton iteration on P_n.
inline Rule gauss_legendre(int n) {
  if (n < 1) throw InvalidArgument("gauss_legendre: need at least one node");
  Rule rule{std::vector<double>(n), std::vector<double>(n)};
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = pk;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

/// Gauss-Legendre rule mapped onto [a, b].
inline Rule gauss_legendre(int n, double a, double b) {
  Rule r = gauss_legendre(n);
  const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
  for (int i = 0; i < n; ++i) {
    r.nodes[i] = mid + half * r.nodes[i];
    r.weights[i] *= half;
  }
  return r;
}

struct Result {
  double value = 0.0;
  double error = 0.0;
  long evaluations = 0;
};

namespace detail {

template <class F>
struct SimpsonState {
  F& f;
  double tol;
  int max_depth;
  long evals = 0;
  double err = 0.0;
  bool exhausted = false;
};

template <class F>
double simpson_recurse(SimpsonState<F>& st, double a, double b, double fa, double fm,
                       double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = st.f(lm), frm = st.f(rm);
  st.evals += 2;
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth >= st.max_depth) {
    st.exhausted = true;
    st.err += std::abs(delta) / 15.0;
    return left + right + delta / 15.0;
  }
  if (depth > 4 && std::abs(delta) <= 15.0 * tol) {
    st.err += std::abs(delta) / 15.0;
    return left + right + delta / 15.0;
  }
  return simpson_recurse(st, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1) +
         simpson_recurse(st, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1);
}

}  // namespace detail

/// Adaptive Simpson with Richardson correction. `rel_tol` is relative to a
/// coarse estimate of the integral magnitude. Throws NumericalError when the
/// recursion depth is exhausted without meeting the tolerance.
template <class F>
Result adaptive_simpson(F&& f, double a, double b, double rel_tol, int max_depth = 48) {
  const double m = 0.5 * (a + b);
  const double fa = f(a), fm = f(m), fb = f(b);
  // Coarse magnitude from a 17-point sweep so that tiny first estimates do
  // not turn the relative tolerance into an absolute one near zero.
  double scale = 0.0;
  for (int i = 0; i <= 16; ++i) scale += std::abs(f(a + (b - a) * i / 16.0));
  scale *= std::abs(b - a) / 17.0;
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  const double abs_tol = rel_tol * std::max(scale, std::numeric_limits<double>::min());
  detail::SimpsonState<F> st{f, abs_tol, max_depth};
  st.evals = 20;
  const double v = detail::simpson_recurse(st, a, b, fa, fm, fb, whole, abs_tol, 0);
  if (!std::isfinite(v)) throw NumericalError("adaptive_simpson: non-finite integral");
  if (st.exhausted && st.err > abs_tol) {
    std::ostringstream os;
    os << "adaptive_simpson: no convergence on [" << a << ", " << b << "], estimated error "
       << st.err << " > " << abs_tol << " after " << st.evals << " evaluations";
    throw NumericalError(os.str());
  }
  return {v, st.err, st.evals};
}

namespace detail {

inline constexpr std::array<double, 8> kronrod_x = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kronrod_w = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> gauss7_w = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a, b, value, error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

template <class F>
Segment gk15(F& f, double a, double b) {
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  const double fc = f(c);
  double k = kronrod_w[7] * fc;
  double g = gauss7_w[3] * fc;
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kronrod_x[j];
    const double f1 = f(c - dx), f2 = f(c + dx);
    k += kronrod_w[j] * (f1 + f2);
    if (j % 2 == 1) g += gauss7_w[j / 2] * (f1 + f2);
  }
  return {a, b, k * h, std::abs((k - g) * h)};
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod (7/15) quadrature on [a, b] with optional
/// interior breakpoints where the integrand has kinks.
template <class F>
Result gauss_kronrod(F&& f, double a, double b, double rel_tol, double abs_tol = 0.0,
                     const std::vector<double>& breaks = {}, int max_segments = 4000) {
  std::vector<double> pts{a};
  for (double x : breaks)
    if (x > a && x < b) pts.push_back(x);
  pts.push_back(b);
  std::priority_queue<detail::Segment> heap;
  double total = 0.0, err = 0.0;
  long evals = 0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    auto s = detail::gk15(f, pts[i], pts[i + 1]);
    evals += 15;
    total += s.value;
    err += s.error;
    heap.push(s);
  }
  int segments = static_cast<int>(heap.size());
  while (err > std::max({abs_tol, rel_tol * std::abs(total),
                         50.0 * std::numeric_limits<double>::epsilon() * std::abs(total)})) {
    if (segments >= max_segments) {
      std::ostringstream os;
      os << "gauss_kronrod: no convergence on [" << a << ", " << b << "], error estimate "
         << err << " with value " << total << " after " << segments << " segments";
      throw NumericalError(os.str());
    }
    const auto worst = heap.top();
    heap.pop();
    const double m = 0.5 * (worst.a + worst.b);
    auto l = detail::gk15(f, worst.a, m);
    auto r = detail::gk15(f, m, worst.b);
    evals += 30;
    total += l.value + r.value - worst.value;
    err += l.error + r.error - worst.error;
    heap.push(l);
    heap.push(r);
    ++segments;
  }
  // Re-sum from the segment list to remove accumulated update drift.
  double sum = 0.0, esum = 0.0;
  while (!heap.empty()) {
    sum += heap.top().value;
    esum += heap.top().error;
    heap.pop();
  }
  if (!std::isfinite(sum)) throw NumericalError("gauss_kronrod: non-finite integral");
  return {sum, esum, evals};
}

/// Integral over [a, inf) through the map x = a + s / (1 - s).
template <class F>
Result gauss_kronrod_semi_infinite(F&& f, double a, double rel_tol, double abs_tol = 0.0) {
  auto g = [&](double s) {
    if (s >= 1.0) return 0.0;
    const double one_minus = 1.0 - s;
    const double x = a + s / one_minus;
    return f(x) / (one_minus * one_minus);
  };
  return gauss_kronrod(g, 0.0, 1.0, rel_tol, abs_tol);
}

}  // namespace kinchem::quad

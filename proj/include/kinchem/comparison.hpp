#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "kinchem/common.hpp"
#include "kinchem/kinsolver.hpp"
#include "kinchem/quadrature.hpp"
#include "kinchem/velocity.hpp"

namespace kinchem {

/// Auxiliary function k(x, v) = k0 |x|^{-gamma} for x.v < 0 and
/// k0 |proj_{v-perp} x|^{-gamma} for x.v > 0.
struct Supersolution {
  double k0 = 1.0;
  double gamma = 0.5;

  void validate() const {
    if (!(gamma > 0.0 && gamma < 1.0)) throw InvalidArgument("supersolution exponent gamma must lie in (0,1)");
    if (!(k0 > 0.0) || !std::isfinite(k0)) throw InvalidArgument("supersolution amplitude k0 must be positive");
  }
};

inline double k_eval(Vec2 x, Vec2 v, const Supersolution& s) {
  s.validate();
  const double rx = norm(x), rv = norm(v);
  if (rx == 0.0) throw InvalidArgument("k_eval: x = 0");
  if (rv == 0.0) throw InvalidArgument("k_eval: v = 0");
  if (dot(x, v) <= 0.0) return s.k0 * std::pow(rx, -s.gamma);
  const double perp = std::abs(x.x * v.y - x.y * v.x) / rv;
  if (perp == 0.0) throw NumericalError("k_eval: singular ray (x parallel to v, x.v > 0)");
  return s.k0 * std::pow(perp, -s.gamma);
}

/// k in reduced coordinates (r, phi), phi the angle from x to v.
inline double k_radial(double r, double phi, const Supersolution& s) {
  if (!(r > 0.0)) throw InvalidArgument("k_radial: r must be positive");
  if (std::cos(phi) <= 0.0) return s.k0 * std::pow(r, -s.gamma);
  const double perp = r * std::abs(std::sin(phi));
  if (perp == 0.0) throw NumericalError("k_radial: singular ray (phi = 0)");
  return s.k0 * std::pow(perp, -s.gamma);
}

/// Omega(gamma) = 1 + (1/pi) int_{-pi/2}^{pi/2} |sin t|^{-gamma} dt. The
/// endpoint singularity is removed with t = u^{1/(1-gamma)}, which turns
/// sin(t)^{-gamma} dt into (t / sin t)^gamma du / (1 - gamma).
inline double omega_gamma(double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw InvalidArgument("omega_gamma: gamma must lie in (0,1)");
  const double e = 1.0 / (1.0 - gamma);
  auto h = [&](double u) {
    const double t = std::pow(u, e);
    const double ratio = t < 1e-8 ? 1.0 : t / std::sin(t);
    return std::pow(ratio, gamma) * e;
  };
  const double upper = std::pow(pi / 2.0, 1.0 - gamma);
  const auto res = quad::gauss_kronrod(h, 0.0, upper, 1e-13);
  return 1.0 + 2.0 / pi * res.value;
}

/// int_V k(x, v') dv' = k0 r^{-gamma} (|V|/2) Omega(gamma) (ball only).
inline double k_velocity_integral(double r, const Supersolution& s, const VelocitySet& vset) {
  if (vset.kind() != VelocityKind::Ball) throw InvalidArgument("k_velocity_integral: only the ball velocity set is supported");
  if (!(r > 0.0)) throw InvalidArgument("k_velocity_integral: r must be positive");
  s.validate();
  return s.k0 * std::pow(r, -s.gamma) * 0.5 * vset.measure() * omega_gamma(s.gamma);
}

/// Largest mass for which k is a supersolution: 4 pi gamma / (chi0 |V| Omega(gamma)).
inline double small_mass_bound(double gamma, double chi0, const VelocitySet& vset) {
  return 4.0 * pi * gamma / (chi0 * vset.measure() * omega_gamma(gamma));
}

struct GammaStar {
  double gamma = 0.0;
  double ratio = 0.0;  // gamma / Omega(gamma)
  double value = 0.0;  // 4 gamma / Omega(gamma)
  int iterations = 0;
};

/// Maximizes gamma / Omega(gamma) on (0,1) by golden-section search.
inline GammaStar gamma_star(double tol = 1e-6) {
  auto f = [](double g) { return g / omega_gamma(g); };
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = 1e-6, b = 1.0 - 1e-6;
  double c = b - invphi * (b - a), d = a + invphi * (b - a);
  double fc = f(c), fd = f(d);
  GammaStar out;
  while (b - a > tol) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = f(d);
    }
    ++out.iterations;
  }
  out.gamma = 0.5 * (a + b);
  out.ratio = f(out.gamma);
  out.value = 4.0 * out.ratio;
  return out;
}

struct SupersolutionSample {
  double r;
  double phi;
  double w;
};

struct SupersolutionReport {
  double mass = 0.0;
  double mass_bound = 0.0;
  bool mass_condition = true;
  std::size_t samples = 0;
  std::size_t violations = 0;
  double max_violation = 0.0;  // max over samples of (rhs - lhs) / max(lhs, rhs), floored at 0
  bool passed = true;
};

/// Checks v.grad k >= chi0 (v.xhat)_- (M / 2 pi r) int k dv' at every sample
/// off the singular ray, with the analytic v.grad k = (v.xhat)_- (gamma/r) k
/// on the incoming branch and 0 on the outgoing one.
inline SupersolutionReport supersolution_check(const Supersolution& s, double M, double chi0,
                                               const VelocitySet& vset,
                                               const std::vector<SupersolutionSample>& samples,
                                               double rel_tol = 1e-9) {
  s.validate();
  SupersolutionReport rep;
  rep.mass = M;
  rep.mass_bound = small_mass_bound(s.gamma, chi0, vset);
  rep.mass_condition = M <= rep.mass_bound * (1.0 + 1e-12);
  const double omega = omega_gamma(s.gamma);
  for (const auto& p : samples) {
    if (std::cos(p.phi) > 0.0 && std::sin(p.phi) == 0.0) continue;
    const double k = k_radial(p.r, p.phi, s);
    const double vx = negative_part(p.w * std::cos(p.phi));
    const double lhs = vx * (s.gamma / p.r) * k;
    const double kint = s.k0 * std::pow(p.r, -s.gamma) * 0.5 * vset.measure() * omega;
    const double rhs = chi0 * vx * M / (2.0 * pi * p.r) * kint;
    ++rep.samples;
    const double scale = std::max(lhs, rhs);
    const double viol = scale > 0.0 ? (rhs - lhs) / scale : 0.0;
    rep.max_violation = std::max(rep.max_violation, viol);
    if (viol > rel_tol) ++rep.violations;
  }
  rep.passed = rep.violations == 0;
  return rep;
}

/// Tensor grid of samples for supersolution_check.
inline std::vector<SupersolutionSample> sample_grid(const std::vector<double>& rs, int n_phi,
                                                    const std::vector<double>& ws) {
  std::vector<SupersolutionSample> out;
  for (double r : rs)
    for (int j = 0; j < n_phi; ++j)
      for (double w : ws) out.push_back({r, -pi + (j + 0.5) * 2.0 * pi / n_phi, w});
  return out;
}

/// sup over cells of (g - k)_+ with k evaluated at the cell-center nodes.
inline double comparison_excess(const PhaseState& st, const Supersolution& s) {
  const PhaseGrid& G = *st.grid;
  double worst = 0.0;
  for (int i = 0; i < G.nr(); ++i)
    for (int j = 0; j < G.nphi(); ++j) {
      const double k = k_radial(G.r(i), G.phi(j), s);
      for (int kk = 0; kk < G.nw(); ++kk) worst = std::max(worst, st.at(i, kk, j) - k);
    }
  return worst;
}

/// (sum_v k(x - t v, v)^q weight)^{1/q} |x|^{gamma}: the free-streaming
/// image of k measured against |x|^{-gamma}.
inline double free_streaming_ratio(Vec2 x, double t, const Supersolution& s, const VelocitySet& vset, double q) {
  double acc = 0.0;
  for (int k = 0; k < vset.n_speed(); ++k)
    for (int j = 0; j < vset.n_angle(); ++j) {
      const Vec2 v = vset.vector(k, j);
      acc += std::pow(k_eval(x - t * v, v, s), q) * vset.weight(k, j);
    }
  return std::pow(acc, 1.0 / q) * std::pow(norm(x), s.gamma);
}

}  // namespace kinchem

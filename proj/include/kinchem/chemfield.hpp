#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "kinchem/common.hpp"
#include "kinchem/quadrature.hpp"

namespace kinchem {

/// Radial density on a uniform cell-centered grid r_i = (i + 1/2) dr.
struct RadialDensity {
  double dr = 0.0;
  std::vector<double> r;
  std::vector<double> rho;

  RadialDensity() = default;
  RadialDensity(double dr_, std::vector<double> rho_) : dr(dr_), rho(std::move(rho_)) {
    if (!(dr > 0.0) || !std::isfinite(dr)) throw InvalidArgument("radial grid spacing must be positive");
    r.resize(rho.size());
    for (std::size_t i = 0; i < rho.size(); ++i) r[i] = (static_cast<double>(i) + 0.5) * dr;
  }

  static RadialDensity zeros(std::size_t n, double dr) { return {dr, std::vector<double>(n, 0.0)}; }

  std::size_t size() const { return rho.size(); }
  double r_max() const { return dr * static_cast<double>(rho.size()); }

  /// Per-cell values a_i = rho_i r_i dr; the mass is 2 pi sum a_i.
  std::vector<double> cell_moments() const {
    std::vector<double> a(rho.size());
    for (std::size_t i = 0; i < rho.size(); ++i) a[i] = rho[i] * r[i] * dr;
    return a;
  }

  double mass() const {
    const auto a = cell_moments();
    return 2.0 * pi * pairwise_sum(a);
  }

  void validate() const {
    if (!(dr > 0.0)) throw InvalidArgument("radial grid spacing must be positive");
    if (r.size() != rho.size()) throw InvalidArgument("radial density: size mismatch");
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (!(r[i] > 0.0)) throw InvalidArgument("radial density: nonpositive grid radius");
      if (i > 0 && !(r[i] > r[i - 1])) throw InvalidArgument("radial density: radii not increasing");
      if (!(rho[i] >= 0.0) || !std::isfinite(rho[i]))
        throw InvalidArgument("radial density: negative or non-finite value at cell " + std::to_string(i));
    }
  }
};

/// Radial derivative of the chemical concentration on the density grid.
struct ChemField {
  std::vector<double> r;
  std::vector<double> Sprime;
  double alpha = 0.0;

  static ChemField zeros(const RadialDensity& rho, double alpha = 0.0) {
    return {rho.r, std::vector<double>(rho.size(), 0.0), alpha};
  }
};

/// Half-cell inclusive cumulative sums m_i = sum_{j<i} a_j + a_i / 2. With
/// this rule sum_i a_i m_i = (sum a)^2 / 2 holds exactly in exact arithmetic.
inline std::vector<double> half_cell_cumulative(const std::vector<double>& a) {
  std::vector<double> m(a.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    m[i] = acc + 0.5 * a[i];
    acc += a[i];
  }
  return m;
}

/// Backward counterpart T_i = sum_{j>i} a_j + a_i / 2.
inline std::vector<double> half_cell_tail(const std::vector<double>& a) {
  std::vector<double> t(a.size());
  double acc = 0.0;
  for (std::size_t i = a.size(); i-- > 0;) {
    t[i] = acc + 0.5 * a[i];
    acc += a[i];
  }
  return t;
}

/// -Delta S = rho in the plane, radial: r S'(r) = -int_0^r lambda rho dlambda.
inline ChemField solve_radial_alpha0(const RadialDensity& rho) {
  rho.validate();
  const auto m = half_cell_cumulative(rho.cell_moments());
  ChemField f{rho.r, std::vector<double>(rho.size()), 0.0};
  for (std::size_t i = 0; i < rho.size(); ++i) f.Sprime[i] = -m[i] / rho.r[i];
  return f;
}

/// |grad B_alpha|(z) for the Bessel kernel
///   B_alpha(z) = (1/4pi) int_0^inf t^{-1} exp(-z^2/4t - alpha t) dt,
/// i.e. (z/8pi) int_0^inf t^{-2} exp(-z^2/4t - alpha t) dt, with t = e^u.
inline double bessel_gradient_kernel(double z, double alpha, double rel_tol = 1e-8) {
  if (!(z > 0.0) || !std::isfinite(z)) throw InvalidArgument("bessel_gradient_kernel: z must be positive (kernel singular at 0)");
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw InvalidArgument("bessel_gradient_kernel: alpha must be positive");
  const double q = 0.25 * z * z;
  // Maximizer of t^{-2} exp(-q/t - alpha t); the integrand in u is
  // doubly-exponentially small a few units below and e^{-u}-small above.
  const double t_peak = q / (1.0 + std::sqrt(1.0 + alpha * q));
  const double u_peak = std::log(t_peak);
  // Factor out the peak value of exp(-q/t - alpha t) / t to keep the
  // integrand O(1).
  const double log_peak = -q / t_peak - alpha * t_peak - u_peak;
  auto h = [&](double u) {
    const double t = std::exp(u);
    return std::exp(-q / t - alpha * t - u - log_peak);
  };
  // Split at the peak so each piece samples it at an endpoint: for large
  // q the peak is far narrower than the interval.
  const double left = quad::adaptive_simpson(h, u_peak - 6.0, u_peak, rel_tol).value;
  const double right = quad::adaptive_simpson(h, u_peak, u_peak + 50.0, rel_tol).value;
  return z / (8.0 * pi) * (left + right) * std::exp(log_peak);
}

/// Poisson kernel gradient magnitude 1/(2 pi z).
inline double poisson_gradient_kernel(double z) {
  if (!(z > 0.0)) throw InvalidArgument("poisson_gradient_kernel: z must be positive");
  return 1.0 / (2.0 * pi * z);
}

/// Universal constant bounding |grad B_alpha - grad B_0| by sqrt(alpha) C:
/// C = (1/2pi) int_{R^2} dzeta / (|zeta| (1 + |zeta|^2)), evaluated in polar
/// coordinates with s = ln|zeta|. Computed once and cached.
inline double kernel_constant() {
  static const double value = [] {
    auto h = [](double s) { return std::exp(s) / (1.0 + std::exp(2.0 * s)); };
    return quad::adaptive_simpson(h, -40.0, 40.0, 1e-12).value;
  }();
  return value;
}

/// -Delta S + alpha S = rho in the plane, radial, via the angular average of
/// the Bessel kernel K_0(k|x-y|)/2pi (k = sqrt(alpha)):
///   S'(r) = -k K_1(kr) int_0^r I_0(k l) rho l dl + k I_1(kr) int_r^inf K_0(k l) rho l dl.
/// Cell sums use the same half-cell rule as the alpha = 0 solver.
inline ChemField solve_radial_alpha_pos(const RadialDensity& rho, double alpha) {
  if (alpha == 0.0) throw InvalidArgument("solve_radial_alpha_pos: alpha = 0, use alpha0 solver");
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw InvalidArgument("solve_radial_alpha_pos: alpha must be positive");
  rho.validate();
  const double k = std::sqrt(alpha);
  if (k * rho.r_max() > 600.0)
    throw NumericalError("solve_radial_alpha_pos: sqrt(alpha) * r_max = " + std::to_string(k * rho.r_max()) +
                         " exceeds the Bessel function range (600)");
  const std::size_t n = rho.size();
  const auto a = rho.cell_moments();
  std::vector<double> wi(n), wk(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double x = k * rho.r[j];
    wi[j] = std::cyl_bessel_i(0.0, x) * a[j];
    wk[j] = std::cyl_bessel_k(0.0, x) * a[j];
  }
  const auto inner = half_cell_cumulative(wi);
  const auto outer = half_cell_tail(wk);
  ChemField f{rho.r, std::vector<double>(n), alpha};
  for (std::size_t i = 0; i < n; ++i) {
    const double x = k * rho.r[i];
    f.Sprime[i] = -k * std::cyl_bessel_k(1.0, x) * inner[i] + k * std::cyl_bessel_i(1.0, x) * outer[i];
  }
  return f;
}

/// Dispatches on alpha.
inline ChemField solve_radial(const RadialDensity& rho, double alpha) {
  return alpha == 0.0 ? solve_radial_alpha0(rho) : solve_radial_alpha_pos(rho, alpha);
}

/// int x . grad S rho dx = 2 pi int r S'(r) rho(r) r dr for the alpha = 0 field.
inline double virial_coupling(const RadialDensity& rho) {
  const auto f = solve_radial_alpha0(rho);
  std::vector<double> terms(rho.size());
  for (std::size_t i = 0; i < rho.size(); ++i) terms[i] = rho.r[i] * f.Sprime[i] * rho.rho[i] * rho.r[i] * rho.dr;
  return 2.0 * pi * pairwise_sum(terms);
}

/// L^p norm of a radial density in the plane.
inline double radial_lp_norm(const RadialDensity& rho, double p) {
  std::vector<double> terms(rho.size());
  for (std::size_t i = 0; i < rho.size(); ++i) terms[i] = std::pow(rho.rho[i], p) * rho.r[i] * rho.dr;
  return std::pow(2.0 * pi * pairwise_sum(terms), 1.0 / p);
}

struct EllipticReport {
  double p = 0.0;
  double sup_gradient = 0.0;       // sup_r |S'(r)|
  double interpolation = 0.0;      // ||rho||_1^{1-p'/2} ||rho||_p^{p'/2}
  double sup_r_gradient = 0.0;     // sup_r r |S'(r)|
  double radial_bound = 0.0;       // M / 2pi
  bool radial_bound_holds = true;
};

/// Evaluates both sides of the elliptic estimate and asserts the radial
/// bound r |S'(r)| <= M / 2pi at every grid point.
inline EllipticReport elliptic_bound_check(const RadialDensity& rho, double p) {
  if (!(p > 2.0)) throw InvalidArgument("elliptic_bound_check: exponent p must exceed 2");
  const auto f = solve_radial_alpha0(rho);
  EllipticReport rep;
  rep.p = p;
  const double M = rho.mass();
  rep.radial_bound = M / (2.0 * pi);
  for (std::size_t i = 0; i < rho.size(); ++i) {
    rep.sup_gradient = std::max(rep.sup_gradient, std::abs(f.Sprime[i]));
    rep.sup_r_gradient = std::max(rep.sup_r_gradient, rho.r[i] * std::abs(f.Sprime[i]));
  }
  const double pp = p / (p - 1.0);
  const double n1 = M, np = radial_lp_norm(rho, p);
  rep.interpolation = (n1 == 0.0 || np == 0.0) ? 0.0 : std::pow(n1, 1.0 - pp / 2.0) * std::pow(np, pp / 2.0);
  rep.radial_bound_holds = rep.sup_r_gradient <= rep.radial_bound * (1.0 + 1e-12);
  return rep;
}

}  // namespace kinchem

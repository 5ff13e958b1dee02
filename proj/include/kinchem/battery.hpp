#pragma once

#include <cmath>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "kinchem/chemfield.hpp"
#include "kinchem/comparison.hpp"
#include "kinchem/diagnostics.hpp"
#include "kinchem/initial_data.hpp"
#include "kinchem/kinsolver.hpp"
#include "kinchem/oracles.hpp"
#include "kinchem/parabolic.hpp"
#include "kinchem/thresholds.hpp"
#include "kinchem/velocity.hpp"

// Oracle battery behind `verify-lemmas`: every closed form and structural
// inequality the solver relies on, checked against the independent
// quadrature and Cartesian oracles.

namespace kinchem {

struct LemmaCheck {
  std::string name;
  bool passed = true;
  double value = 0.0;      // worst observed quantity (error, ratio, ...)
  double tolerance = 0.0;  // passes when value <= tolerance unless noted
  std::string detail;
};

inline double rel_err(double a, double b) {
  const double s = std::max(std::abs(a), std::abs(b));
  return s == 0.0 ? 0.0 : std::abs(a - b) / s;
}

inline LemmaCheck check_averaged_quantities() {
  LemmaCheck c{"averaged-quantities", true, 0.0, 1e-8, ""};
  const std::vector<Vec2> dirs{{1.0, 0.0}, {0.6, 0.8}, {-0.3, 0.7}, {2.0, -1.0}};
  for (VelocityKind kind : {VelocityKind::Ball, VelocityKind::Sphere})
    for (double R : {0.5, 1.0, 2.0}) {
      const auto v = VelocitySet::make(kind, R, 8, 32);
      for (Vec2 e : dirs) {
        c.value = std::max(c.value, rel_err(omega(v) * norm(e), oracle::omega(kind, R, e).value));
        for (Vec2 p : dirs)
          c.value = std::max(c.value, rel_err(directional_first_moment(v, p, e),
                                              oracle::directional_first_moment(kind, R, p, e).value));
      }
      const Mat2 a = second_moment_tensor(v), b = oracle::second_moment_tensor(kind, R);
      c.value = std::max({c.value, rel_err(a.xx, b.xx), rel_err(a.yy, b.yy)});
      c.value = std::max({c.value, std::abs(b.xy) / b.xx, std::abs(b.yx) / b.xx});
    }
  c.passed = c.value <= c.tolerance;
  c.detail = "omega, directional first moment, second moment tensor; ball and sphere, R in {0.5, 1, 2}";
  return c;
}

inline LemmaCheck check_virial_coupling() {
  LemmaCheck c{"virial-coupling", true, 0.0, 1e-6, ""};
  const int n = 2000;
  const double dr = 10.0 / n;
  std::vector<RadialDensity> shapes{
      uniform_disk_density(n, dr, 1.0, 1.0), radial_gaussian_density(n, dr, 1.0, 0.7),
      uniform_disk_density(n, dr, 1.0, 2.5), radial_gaussian_density(n, dr, 1.0, 1.2)};
  {
    std::vector<double> ring(n, 0.0);
    for (int i = 0; i < n; ++i) {
      const double r = (i + 0.5) * dr;
      ring[i] = r < 3.0 ? r * r * (3.0 - r) : 0.0;
    }
    shapes.emplace_back(dr, ring);
  }
  for (double M : {1.0, 2.0 * pi, 10.0})
    for (auto rho : shapes) {
      const double s = M / rho.mass();
      for (double& x : rho.rho) x *= s;
      c.value = std::max(c.value, rel_err(virial_coupling(rho), -M * M / (4.0 * pi)));
    }
  c.passed = c.value <= c.tolerance;
  c.detail = "int x.grad S rho = -M^2/4pi on 5 profiles x 3 masses";
  return c;
}

inline LemmaCheck check_K_functional(std::uint64_t seed) {
  LemmaCheck c{"K-functional", true, 0.0, 1e-8, ""};
  const int n = 4000;
  const double a = 1.3, M = 3.0, dr = 2.0 * a / n;
  const auto disk = uniform_disk_density(n, dr, M, a);
  const double K = K_functional(disk, disk.mass());
  const double closed = M * M * a / (5.0 * pi);
  const double lvl = M / (pi * a * a);
  const double quad = oracle::K_functional([&](double r) { return r < a ? lvl : 0.0; }, a).value;
  c.value = std::max(rel_err(K, closed), rel_err(quad, closed));
  // the cell discretization carries an O(dr^2) error; the oracle is exact
  const double disc_tol = 1e-6;
  bool ok = rel_err(quad, closed) <= c.tolerance && rel_err(K, closed) <= disc_tol;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  int bad = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int m = 200;
    std::vector<double> rho(m);
    for (auto& x : rho) x = U(rng) < 0.3 ? 0.0 : U(rng) * 5.0;
    RadialDensity d(0.05, rho);
    const double Mt = d.mass(), I = second_moment(d), Kt = K_functional(d, Mt);
    const double ratio = Kt / K_bound(Mt, I);
    worst = std::max(worst, ratio);
    if (!(Kt >= 0.0) || ratio > 1.0) ++bad;
  }
  c.passed = ok && bad == 0;
  c.detail = "disk closed form M^2 a/(5 pi) (grid rel err " + std::to_string(rel_err(K, closed)) +
             "); K <= M^{3/2} sqrt(2I)/(2 pi) on 100 random profiles, worst ratio " + std::to_string(worst);
  return c;
}

inline LemmaCheck check_thresholds() {
  LemmaCheck c{"thresholds", true, 0.0, 1e-12, ""};
  for (double chi0 : {0.5, 1.0, 3.0})
    for (double R : {0.5, 1.0, 2.0, 4.0}) {
      c.value = std::max(c.value, rel_err(critical_mass(ThresholdModel::BallKinetic, chi0, R), 32.0 / (chi0 * R * R)));
      c.value = std::max(c.value, rel_err(critical_mass(ThresholdModel::SphereKinetic, chi0, R), 8.0 / (chi0 * R)));
      c.value =
          std::max(c.value, rel_err(critical_mass(ThresholdModel::ParabolicUniformF, chi0, R), 16.0 / (chi0 * R * R)));
      c.value = std::max(c.value, rel_err(2.0 * critical_mass(ThresholdModel::ParabolicUniformF, chi0, R),
                                          critical_mass(ThresholdModel::BallKinetic, chi0, R)));
      for (Equilibrium F : {Equilibrium::UniformBall, Equilibrium::SphereDelta}) {
        const auto kind = F == Equilibrium::UniformBall ? VelocityKind::Ball : VelocityKind::Sphere;
        const auto v = VelocitySet::make(kind, R, 8, 32);
        const auto pp = parabolic_params(F, chi0, v);
        const double m2 = equilibrium_second_moment(F, R);
        const double J = first_moment_coefficient(v);
        c.value = std::max(c.value, rel_err(pp.chi_tilde, chi0 * J));
        c.value = std::max(c.value, rel_err(kinetic_sharp_threshold(m2, J, chi0), parabolic_threshold(pp.D, pp.chi_tilde)));
      }
    }
  c.passed = c.value <= c.tolerance;
  c.detail = "critical masses, kinetic/parabolic factor 2, matched sharp thresholds";
  return c;
}

inline LemmaCheck check_gamma_star() {
  LemmaCheck c{"gamma-star", true, 0.0, 0.01, ""};
  const auto g = gamma_star();
  c.value = std::abs(g.value - 0.806);
  c.passed = c.value <= c.tolerance && rel_err(omega_gamma(0.5), oracle::omega_gamma_beta(0.5)) < 1e-10;
  c.detail = "4 gamma*/Omega(gamma*) = " + format_double(g.value) + " at gamma* = " + format_double(g.gamma);
  return c;
}

inline LemmaCheck check_kernel_constant() {
  LemmaCheck c{"kernel-constant", true, 0.0, 1e-6, ""};
  const double q = kernel_constant(), o = oracle::kernel_constant().value;
  c.value = std::max(std::abs(q - pi / 2.0), std::abs(o - pi / 2.0));
  double worst = 0.0;
  for (double alpha : {0.01, 0.1, 1.0})
    for (int i = 0; i <= 60; ++i) {
      const double z = std::pow(10.0, -4.0 + 0.1 * i);
      const double diff = std::abs(bessel_gradient_kernel(z, alpha) - poisson_gradient_kernel(z));
      worst = std::max(worst, diff / (std::sqrt(alpha) * pi / 2.0));
    }
  c.passed = c.value <= c.tolerance && worst <= 1.0 + 1e-6;
  c.detail = "C = pi/2; max |grad B_alpha - grad B_0| / (sqrt(alpha) pi/2) = " + format_double(worst);
  return c;
}

inline LemmaCheck check_supersolution() {
  LemmaCheck c{"supersolution", true, 0.0, 1e-9, ""};
  const auto v = VelocitySet::ball(1.0, 8, 32);
  const Supersolution s{1.0, 0.5};
  const double M = small_mass_bound(s.gamma, 1.0, v);
  const auto samples = sample_grid({0.01, 0.1, 0.5, 1.0, 3.0, 10.0}, 64, {0.1, 0.5, 1.0});
  const auto at = supersolution_check(s, M, 1.0, v, samples);
  const auto twice = supersolution_check(s, 2.0 * M, 1.0, v, samples);
  c.value = at.max_violation;
  c.passed = at.passed && at.max_violation <= c.tolerance && twice.violations > 0;
  c.detail = "equality mass " + format_double(M) + ": " + std::to_string(at.violations) + " violations; 2x mass: " +
             std::to_string(twice.violations) + " violations";
  return c;
}

struct CartesianCrossCheck {
  double l1_relative = 0.0;
  double rotation_defect = 0.0;
  double cartesian_mass_change = 0.0;
};

/// Gaussian data run to t on the Cartesian oracle and the radial solver;
/// the radial density is interpolated to the Cartesian cell centers.
inline CartesianCrossCheck cartesian_cross_check(int n = 48, double L = 4.0, double sigma = 1.0, double chi0 = 1.0,
                                                 double M = 10.0, double t = 0.5) {
  CartesianCrossCheck out;
  const oracle::CartesianGrid cg(n, L, VelocitySet::ball(1.0, 4, 16, 0.0));
  oracle::CartesianState cs(cg);
  const double V = cg.velocities().weight_sum();
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      const double r2 = cg.x(a) * cg.x(a) + cg.x(b) * cg.x(b);
      const double rho = M / (2.0 * pi * sigma * sigma) * std::exp(-r2 / (2.0 * sigma * sigma));
      for (int k = 0; k < cg.nw(); ++k)
        for (int j = 0; j < cg.nth(); ++j) cs.at(a, b, k, j) = rho / V;
    }
  const double cdt_max = oracle::cartesian_dt_max(cg);
  {
    auto rot = oracle::rotate_quarter(cs);
    auto s1 = cs;
    oracle::cartesian_step(s1, chi0, 0.9 * cdt_max);
    oracle::cartesian_step(rot, chi0, 0.9 * cdt_max);
    const auto rs1 = oracle::rotate_quarter(s1);
    for (std::size_t i = 0; i < rot.f.size(); ++i)
      out.rotation_defect = std::max(out.rotation_defect, std::abs(rot.f[i] - rs1.f[i]));
  }
  const double M0 = oracle::cartesian_mass(cs);
  const int csteps = static_cast<int>(std::ceil(t / (0.9 * cdt_max)));
  for (int s = 0; s < csteps; ++s) oracle::cartesian_step(cs, chi0, t / csteps);
  out.cartesian_mass_change = std::abs(oracle::cartesian_mass(cs) - M0) / M0;

  auto G = std::make_shared<const PhaseGrid>(400, 1.5 * L, VelocitySet::ball(1.0, 8, 64));
  InitialSpec sp;
  sp.family = InitialFamily::RadialGaussian;
  sp.mass = M;
  sp.sigma = sigma;
  auto st = make_initial_state(G, sp);
  const int rsteps = static_cast<int>(std::ceil(t / (2.0 * 0.9 * transport_dt_max(*G))));
  for (int s = 0; s < rsteps; ++s) strang_step(st, {chi0, 0.0}, t / rsteps);
  const auto rho = rho_of(st);
  const auto crho = oracle::cartesian_rho(cs);
  double num = 0.0, den = 0.0;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      const double u = std::hypot(cg.x(a), cg.x(b)) / G->dr() - 0.5;
      const int i = static_cast<int>(std::floor(u));
      const double fr = u - i;
      double rr = 0.0;
      if (i < 0)
        rr = rho.rho[0];
      else if (i + 1 < static_cast<int>(rho.size()))
        rr = rho.rho[i] * (1.0 - fr) + rho.rho[i + 1] * fr;
      num += std::abs(crho[static_cast<std::size_t>(a) * n + b] - rr);
      den += rr;
    }
  out.l1_relative = num / den;
  return out;
}

inline LemmaCheck check_cartesian_symmetry() {
  LemmaCheck c{"cartesian-cross-check", true, 0.0, 0.05, ""};
  const auto x = cartesian_cross_check();
  c.value = x.l1_relative;
  c.passed = x.l1_relative <= c.tolerance && x.rotation_defect <= 1e-10;
  c.detail = "L1 relative distance at t = 0.5: " + format_double(x.l1_relative) +
             "; quarter-turn rotation defect " + format_double(x.rotation_defect);
  return c;
}

/// The three default data: centered Gaussian x uniform, Gaussian x
/// Gaussian in v, off-center Gaussian x uniform.
inline std::vector<std::pair<oracle::PhaseFunction, oracle::DispersionSetup>> dispersion_data() {
  const double sig = 0.125;
  oracle::DispersionSetup su;
  su.sigma = sig;
  const Vec2 c{0.4, -0.25};
  auto su_off = su;
  su_off.center = c;
  return {
      {[sig](Vec2 x, Vec2) { return std::exp(-dot(x, x) / (2.0 * sig * sig)); }, su},
      {[sig](Vec2 x, Vec2 v) { return std::exp(-dot(x, x) / (2.0 * sig * sig) - dot(v, v) / (2.0 * 0.09)); }, su},
      {[sig, c](Vec2 x, Vec2) {
         const Vec2 d = x - c;
         return std::exp(-dot(d, d) / (2.0 * sig * sig));
       },
       su_off},
  };
}

inline LemmaCheck check_dispersion() {
  LemmaCheck c{"dispersion", true, 0.0, 1.0, ""};
  const std::vector<std::pair<double, double>> pairs{{3.0, 1.5}, {4.0, 2.0}, {3.0, 3.0}};
  const std::vector<double> times{0.5, 1.0, 2.0, 4.0};
  double worst_eq = 0.0, min_decay = std::numeric_limits<double>::infinity();
  for (const auto& [f, su] : dispersion_data()) {
    const auto rep = oracle::dispersion_check(f, su, pairs, times);
    c.passed = c.passed && rep.passed;
    min_decay = std::min(min_decay, rep.decay_exponent / rep.expected_exponent);
    for (const auto& s : rep.samples) {
      c.value = std::max(c.value, s.lhs / s.rhs);
      if (s.p == s.q) worst_eq = std::max(worst_eq, rel_err(s.lhs, s.rhs));
    }
  }
  c.tolerance = 1.05;
  c.passed = c.passed && c.value <= c.tolerance && worst_eq <= 1e-9 && min_decay >= 0.95;
  c.detail = "max lhs/rhs " + format_double(c.value) + "; p = q defect " + format_double(worst_eq) +
             "; decay exponent / expected >= " + format_double(min_decay);
  return c;
}

inline std::vector<LemmaCheck> run_battery(std::uint64_t seed) {
  return {check_averaged_quantities(), check_virial_coupling(), check_K_functional(seed),
          check_thresholds(),          check_gamma_star(),      check_kernel_constant(),
          check_supersolution(),       check_cartesian_symmetry(), check_dispersion()};
}

}  // namespace kinchem

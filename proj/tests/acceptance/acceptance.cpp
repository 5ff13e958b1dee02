// Acceptance run: every criterion prints one PASS/FAIL line. Reference
// values come from closed forms and the independent oracles, never from the
// code under test.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "kinchem/battery.hpp"
#include "kinchem/kinchem.hpp"

#ifndef KINCHEM_PRESET_DIR
#error "KINCHEM_PRESET_DIR must point at the presets directory"
#endif

using namespace kinchem;

namespace {

struct Outcome {
  bool passed = true;
  std::string detail;
};

struct Criterion {
  int id;
  const char* name;
  double budget_seconds;
  std::function<Outcome()> run;
};

std::string preset(const std::string& name) { return std::string(KINCHEM_PRESET_DIR) + "/" + name; }

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

double rel(double a, double b) {
  const double s = std::max(std::abs(a), std::abs(b));
  return s == 0.0 ? 0.0 : std::abs(a - b) / s;
}

RadialDensity scaled(RadialDensity d, double M) {
  const double s = M / d.mass();
  for (double& x : d.rho) x *= s;
  return d;
}

// 1. omega, directional first moment and second-moment tensor against quadrature.
Outcome averaged_quantities() {
  std::mt19937_64 rng(101);
  std::normal_distribution<double> N;
  double worst = 0.0;
  for (VelocityKind kind : {VelocityKind::Ball, VelocityKind::Sphere})
    for (double R : {0.5, 1.0, 2.0}) {
      const auto v = VelocitySet::make(kind, R, 8, 32);
      for (int n = 0; n < 6; ++n) {
        const Vec2 e{N(rng), N(rng)}, p{N(rng), N(rng)};
        worst = std::max(worst, rel(omega(v) * norm(e), oracle::omega(kind, R, e).value));
        worst = std::max(worst, rel(directional_first_moment(v, p, e), oracle::directional_first_moment(kind, R, p, e).value));
      }
      const Mat2 a = second_moment_tensor(v), b = oracle::second_moment_tensor(kind, R);
      worst = std::max({worst, rel(a.xx, b.xx), rel(a.yy, b.yy), std::abs(a.xy - b.xy) / b.xx,
                        std::abs(a.yx - b.yx) / b.xx});
    }
  return {worst <= 1e-8, "max relative deviation " + fmt(worst) + " (tol 1e-8)"};
}

// 2. int x.grad S rho dx = -M^2/4pi on five profiles and three masses.
Outcome virial_coupling_identity() {
  const int n = 1500;
  const double dr = 8.0 / n;
  std::vector<RadialDensity> shapes{uniform_disk_density(n, dr, 1.0, 1.0), radial_gaussian_density(n, dr, 1.0, 0.6),
                                    uniform_disk_density(n, dr, 1.0, 3.0)};
  std::vector<double> ring(n), bumps(n);
  for (int i = 0; i < n; ++i) {
    const double r = (i + 0.5) * dr;
    ring[i] = r < 4.0 ? r * r * (4.0 - r) : 0.0;
    bumps[i] = 1.0 + std::cos(3.0 * r) + std::exp(-r);
  }
  shapes.emplace_back(dr, ring);
  shapes.emplace_back(dr, bumps);
  double worst = 0.0;
  for (double M : {1.0, 2.0 * pi, 10.0})
    for (const auto& s : shapes) worst = std::max(worst, rel(virial_coupling(scaled(s, M)), -M * M / (4.0 * pi)));
  return {worst <= 1e-6, "5 profiles x 3 masses, max relative error " + fmt(worst) + " (tol 1e-6)"};
}

// 3. K for the uniform disk and the Cauchy-Schwarz bound on random profiles.
Outcome k_functional() {
  const double M = 3.0, a = 1.3;
  const double closed = M * M * a / (5.0 * pi);
  const double lvl = M / (pi * a * a);
  const double quad = oracle::K_functional([&](double r) { return r < a ? lvl : 0.0; }, a).value;
  const auto disk = uniform_disk_density(4000, 2.0 * a / 4000, M, a);
  const double K = K_functional(disk, disk.mass());
  const double e_closed = rel(closed, quad), e_disc = rel(K, quad);
  std::mt19937_64 rng(303);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  double worst = 0.0;
  bool nonneg = true;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> v(150 + trial);
    for (auto& x : v) x = U(rng) < 0.3 ? 0.0 : std::pow(U(rng), 3.0) * 10.0;
    const RadialDensity d(0.04, v);
    const double Mt = d.mass(), Kt = K_functional(d, Mt);
    nonneg = nonneg && Kt >= 0.0;
    worst = std::max(worst, Kt / (std::pow(Mt, 1.5) * std::sqrt(2.0 * second_moment(d)) / (2.0 * pi)));
  }
  const bool ok = e_closed <= 1e-8 && e_disc <= 1e-8 && nonneg && worst <= 1.0;
  return {ok, "closed form vs quadrature " + fmt(e_closed) + ", solver vs quadrature " + fmt(e_disc) +
                  "; worst K / bound over 100 profiles " + fmt(worst)};
}

// 4. Critical masses, the factor-2 gap and the matched sharp thresholds.
Outcome thresholds() {
  double worst = 0.0;
  for (double chi0 : {0.5, 1.0, 2.5})
    for (double R : {0.5, 1.0, 2.0}) {
      const double ball = critical_mass(ThresholdModel::BallKinetic, chi0, R);
      const double sph = critical_mass(ThresholdModel::SphereKinetic, chi0, R);
      const double par = critical_mass(ThresholdModel::ParabolicUniformF, chi0, R);
      worst = std::max({worst, rel(ball, 32.0 / (chi0 * R * R)), rel(sph, 8.0 / (chi0 * R)),
                        rel(par, 16.0 / (chi0 * R * R)), rel(ball, 2.0 * par)});
      // Uniform F on the ball: D = R^2/4, chi~ = chi0 pi R^4/8, int |v|^2 F = R^2/2.
      const double D = R * R / 4.0, ct = chi0 * pi * std::pow(R, 4) / 8.0, m2 = R * R / 2.0;
      const double J = oracle::directional_first_moment(VelocityKind::Ball, R, {1.0, 0.0}, {1.0, 0.0}).value;
      worst = std::max({worst, rel(parabolic_threshold(D, ct), par), rel(kinetic_sharp_threshold(m2, J, chi0), par)});
      const auto pp = parabolic_params(Equilibrium::UniformBall, chi0, VelocitySet::ball(R));
      worst = std::max({worst, rel(pp.D, D), rel(pp.chi_tilde, ct)});
    }
  return {worst <= 1e-8, "max relative deviation " + fmt(worst) + "; ball 32, sphere 8, parabolic 16 at chi0 = R = 1"};
}

// 5. gamma* = argmax gamma / Omega(gamma).
Outcome gamma_star_search() {
  const auto g = gamma_star();
  // Independent check: a fine scan of the Beta-function form of Omega.
  double best = 0.0;
  for (int i = 1; i < 1000; ++i) {
    const double x = i / 1000.0;
    best = std::max(best, 4.0 * x / oracle::omega_gamma_beta(x));
  }
  const bool ok = std::abs(g.value - 0.806) <= 0.01 && std::abs(g.value - best) <= 1e-5;
  return {ok, "4 gamma*/Omega(gamma*) = " + fmt(g.value) + " at gamma* = " + fmt(g.gamma) + "; scan " + fmt(best)};
}

// 6. Kernel constant pi/2 and the sampled kernel-difference bound.
Outcome kernel_constant_check() {
  const double q = oracle::kernel_constant().value;
  const double lib = kernel_constant();
  double worst = 0.0;
  for (double alpha : {0.01, 0.1, 1.0})
    for (int i = 0; i <= 70; ++i) {
      const double z = std::pow(10.0, -4.0 + 0.1 * i);
      const double d = std::abs(oracle::bessel_gradient_closed(z, alpha) - 1.0 / (2.0 * pi * z));
      const double dl = std::abs(bessel_gradient_kernel(z, alpha) - poisson_gradient_kernel(z));
      worst = std::max({worst, d / (std::sqrt(alpha) * pi / 2.0), dl / (std::sqrt(alpha) * pi / 2.0)});
    }
  const bool ok = std::abs(q - pi / 2.0) <= 1e-6 && std::abs(lib - pi / 2.0) <= 1e-6 && worst <= 1.0 + 1e-6;
  return {ok, "C = " + fmt(q) + " (oracle), " + fmt(lib) + " (library); max ratio " + fmt(worst)};
}

// 7. Supercritical blow-up verdict and subcritical comparison control.
Outcome blowup_dichotomy() {
  auto sup_cfg = load_config(preset("supercritical_disk.json"));
  const auto t0 = std::chrono::steady_clock::now();
  const auto sup = run_simulation(sup_cfg);
  const double t_sup = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool sup_ok = sup.exit_code == ExitBlowup && sup.virial_tracked && sup.virial.holds &&
                      sup.verdict.verdict == Verdict::BlowupSuspected &&
                      sup.verdict.time < sup.virial.projected_vanishing_time;

  auto sub_cfg = load_config(preset("subcritical_comparison.json"));
  const auto t1 = std::chrono::steady_clock::now();
  const auto sub = run_simulation(sub_cfg);
  const double t_sub = std::chrono::duration<double>(std::chrono::steady_clock::now() - t1).count();
  // k-scale: the largest value of k on the grid nodes.
  const auto G = make_grid(sub_cfg);
  const Supersolution k{sub_cfg.initial.k0, sub_cfg.initial.gamma};
  double k_scale = 0.0;
  for (int j = 0; j < G->nphi(); ++j) k_scale = std::max(k_scale, k_radial(G->r(0), G->phi(j), k));
  double max_ratio = 0.0;
  for (double x : sub.verdict.max_norm_ratio) max_ratio = std::max(max_ratio, x);
  const bool mass_ok = sub_cfg.initial.mass <= small_mass_bound(k.gamma, sub_cfg.model.chi0, VelocitySet::ball(sub_cfg.model.R));
  const bool sub_ok = sub.exit_code == ExitGlobal && mass_ok && sub.series.back().t == sub_cfg.time.t_end &&
                      sub.max_excess <= 1e-6 * k_scale && max_ratio < sub_cfg.output.growth_factor;
  const bool budget = t_sup < 300.0 && t_sub < 300.0;
  return {sup_ok && sub_ok && budget,
          "supercritical: exit " + std::to_string(sup.exit_code) + ", verdict at t = " + fmt(sup.verdict.time) +
              " < projected vanishing " + fmt(sup.virial.projected_vanishing_time) + ", virial max excess " +
              fmt(sup.virial.max_excess) + " (" + fmt(t_sup) + " s); subcritical: exit " +
              std::to_string(sub.exit_code) + " through t = " + fmt(sub.series.back().t) + ", sup(f-k)+ = " +
              fmt(sub.max_excess) + ", max norm ratio " + fmt(max_ratio) + " (" + fmt(t_sub) + " s)"};
}

// 8. Supersolution inequality at the equality mass and at twice it.
Outcome supersolution() {
  const auto v = VelocitySet::ball(1.0, 8, 32);
  const Supersolution s{1.0, 0.5};
  // Equality mass from the Beta-function form of Omega.
  const double M = 4.0 * pi * 0.5 / (v.measure() * oracle::omega_gamma_beta(0.5));
  const auto samples = sample_grid({0.01, 0.1, 0.5, 1.0, 3.0, 10.0}, 96, {0.1, 0.5, 1.0});
  const auto at = supersolution_check(s, M, 1.0, v, samples);
  const auto twice = supersolution_check(s, 2.0 * M, 1.0, v, samples);
  const bool ok = at.passed && at.max_violation <= 1e-9 && !twice.passed && twice.violations > 0;
  return {ok, "equality mass " + fmt(M) + ": max violation " + fmt(at.max_violation) + "; 2x mass: " +
                  std::to_string(twice.violations) + " of " + std::to_string(twice.samples) + " samples violate"};
}

// 9. Dispersion estimate on the Cartesian oracle battery.
Outcome dispersion() {
  const std::vector<std::pair<double, double>> pairs{{3.0, 1.5}, {4.0, 2.0}, {3.0, 3.0}};
  const std::vector<double> times{0.5, 1.0, 2.0, 4.0};
  double worst = 0.0, min_decay = 1e300;
  bool ok = true;
  for (const auto& [f, su] : dispersion_data()) {
    const auto rep = oracle::dispersion_check(f, su, pairs, times);
    ok = ok && rep.passed;
    for (const auto& s : rep.samples) worst = std::max(worst, s.lhs / s.rhs);
    const double expected = 2.0 * (1.0 / 1.5 - 1.0 / 3.0);
    ok = ok && rep.expected_exponent == expected;
    min_decay = std::min(min_decay, rep.decay_exponent / expected);
  }
  ok = ok && worst <= 1.05 && min_decay >= 0.95;
  return {ok, "max lhs/rhs " + fmt(worst) + " (slack 5%); decay exponent / 2(1/q-1/p) >= " + fmt(min_decay) +
                  " for (p,q) = (3,3/2)"};
}

// 10. Drift-diffusion limit on the Gaussian preset.
Outcome drift_diffusion_limit() {
  const auto c = load_config(preset("gaussian_limit.json"));
  LimitStudyConfig lc;
  lc.nr = c.grid.nr;
  lc.r_max = c.grid.r_max;
  lc.n_speed = c.grid.n_speed;
  lc.n_angle = c.grid.n_angle;
  lc.R = c.model.R;
  lc.chi0 = c.model.chi0;
  lc.mass = c.initial.mass;
  lc.sigma = c.initial.sigma;
  lc.t_end = c.time.t_end;
  lc.epsilons = {0.4, 0.2, 0.1};
  const auto rep = limit_study(lc);
  bool ok = rep.errors.size() == 3;
  for (std::size_t n = 1; ok && n < rep.errors.size(); ++n) ok = rep.errors[n] <= rep.errors[n - 1];
  ok = ok && rep.errors[2] < 0.5 * rep.errors[0];
  return {ok, "e(0.4) = " + fmt(rep.errors[0]) + ", e(0.2) = " + fmt(rep.errors[1]) + ", e(0.1) = " +
                  fmt(rep.errors[2]) + "; e(0.1)/e(0.4) = " + fmt(rep.errors[2] / rep.errors[0])};
}

// 11. Mass conservation and thread-count independence.
Outcome conservation_determinism() {
  const auto c = load_config(preset("gaussian_limit.json"));
  std::vector<std::string> csv;
  double drift = 0.0, outflow = 0.0, M0 = 0.0;
  for (std::size_t t : {1u, 4u, 8u}) {
    set_threads(t);
    const auto r = run_simulation(c);
    csv.push_back(r.csv);
    drift = std::max(drift, r.max_mass_drift_rate);
    outflow = std::max(outflow, r.outflow);
    M0 = r.series.front().M;
  }
  set_threads(1);
  const bool same = csv[0] == csv[1] && csv[0] == csv[2];
  const bool ok = same && drift <= 1e-9 && outflow <= 1e-9 * M0;
  return {ok, std::string(same ? "byte-identical" : "DIFFERENT") + " CSV for 1, 4, 8 threads; mass drift " +
                  fmt(drift) + " per unit time; outflow " + fmt(outflow)};
}

}  // namespace

int main() {
  std::setvbuf(stdout, nullptr, _IOLBF, 0);
  const std::vector<Criterion> criteria{
      {1, "averaged quantities", 5.0, averaged_quantities},
      {2, "virial coupling identity", 5.0, virial_coupling_identity},
      {3, "K functional", 10.0, k_functional},
      {4, "threshold reproduction", 1.0, thresholds},
      {5, "gamma* search", 5.0, gamma_star_search},
      {6, "kernel constant", 30.0, kernel_constant_check},
      {7, "blow-up dichotomy", 600.0, blowup_dichotomy},
      {8, "supersolution inequality", 10.0, supersolution},
      {9, "dispersion estimate", 120.0, dispersion},
      {10, "drift-diffusion convergence", 600.0, drift_diffusion_limit},
      {11, "conservation and determinism", 120.0, conservation_determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_budget = secs < c.budget_seconds;
    const bool pass = o.passed && in_budget;
    if (!pass) ++failed;
    std::printf("%s [%2d] %s (%.2f s, budget %.0f s%s): %s\n", pass ? "PASS" : "FAIL", c.id, c.name, secs,
                c.budget_seconds, in_budget ? "" : ", EXCEEDED", o.detail.c_str());
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}

#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "kinchem/chemfield.hpp"
#include "kinchem/common.hpp"
#include "kinchem/initial_data.hpp"
#include "kinchem/kinsolver.hpp"
#include "kinchem/velocity.hpp"

namespace kinchem {

/// Equilibrium velocity distribution of the relaxation kernel.
enum class Equilibrium { UniformBall, SphereDelta };

inline std::string_view to_string(Equilibrium e) { return e == Equilibrium::UniformBall ? "uniform-ball" : "sphere-delta"; }

inline Equilibrium equilibrium_from_string(std::string_view s) {
  if (s == "uniform-ball") return Equilibrium::UniformBall;
  if (s == "sphere-delta") return Equilibrium::SphereDelta;
  throw InvalidArgument("unknown equilibrium '" + std::string(s) + "' (expected uniform-ball or sphere-delta)");
}

inline void check_equilibrium(Equilibrium F, const VelocitySet& vset) {
  if (F == Equilibrium::UniformBall && vset.kind() != VelocityKind::Ball)
    throw InvalidArgument("uniform-ball equilibrium needs the ball velocity set");
  if (F == Equilibrium::SphereDelta && vset.kind() != VelocityKind::Sphere)
    throw InvalidArgument("sphere-delta equilibrium needs the circle velocity set");
}

/// Nodal value of F: constant 1/|V| under the velocity quadrature, so that
/// sum_v F weight = 1 up to rounding.
inline double equilibrium_value(Equilibrium F, const VelocitySet& vset) {
  check_equilibrium(F, vset);
  return 1.0 / vset.weight_sum();
}

/// int v (x) v F dv for a rotationally symmetric F given as a function of v,
/// by quadrature over the velocity nodes. Rejects anisotropic F.
inline Mat2 effective_diffusion(const VelocitySet& vset, const std::function<double(Vec2)>& F, double tol = 1e-10) {
  Mat2 m;
  double mass = 0.0;
  for (int k = 0; k < vset.n_speed(); ++k)
    for (int j = 0; j < vset.n_angle(); ++j) {
      const Vec2 v = vset.vector(k, j);
      const double f = F(v) * vset.weight(k, j);
      mass += f;
      m.xx += v.x * v.x * f;
      m.xy += v.x * v.y * f;
      m.yx += v.y * v.x * f;
      m.yy += v.y * v.y * f;
    }
  const double scale = std::max(std::abs(m.xx), std::abs(m.yy));
  if (std::abs(m.xx - m.yy) > tol * scale || std::abs(m.xy) > tol * scale)
    throw InvalidArgument("effective_diffusion: equilibrium is not rotationally symmetric");
  (void)mass;
  return m;
}

/// Closed forms: (R^2/4) Id for the uniform ball, (R^2/2) Id for the circle.
inline Mat2 effective_diffusion(Equilibrium F, double R) {
  const double d = F == Equilibrium::UniformBall ? R * R / 4.0 : R * R / 2.0;
  return {d, 0.0, 0.0, d};
}

/// int |v|^2 F dv.
inline double equilibrium_second_moment(Equilibrium F, double R) {
  return F == Equilibrium::UniformBall ? R * R / 2.0 : R * R;
}

struct ScaledConfig {
  double epsilon = 1.0;
  Equilibrium F = Equilibrium::UniformBall;
  ModelParams model;
  double relaxation = 1.0;  // weight of the rho F - f term (0 disables it)
  Reconstruction recon = Reconstruction::Muscl;

  void validate() const {
    if (!(epsilon > 0.0 && epsilon <= 1.0)) throw InvalidArgument("epsilon must lie in (0,1]");
    if (!(relaxation >= 0.0)) throw InvalidArgument("relaxation weight must be nonnegative");
  }
};

/// Largest admissible step: each transport half step moves at speed w/eps,
/// and the step resolves the relaxation time, dt <= eps^2 / 2.
inline double scaled_dt_max(const PhaseGrid& G, const ScaledConfig& cfg) {
  return std::min(2.0 * cfg.epsilon * transport_dt_max(G, cfg.recon), 0.5 * cfg.epsilon * cfg.epsilon);
}

/// Exact per-cell solution over dt of
///   g' = a (rho F - g) + c (b rho - lambda g),
/// a = relaxation / eps^2, c = chi0 / eps, b = w (cos S')_+, lambda = omega_h |S'|.
inline void relaxation_collision_step(PhaseState& s, const ChemField& field, const ScaledConfig& cfg, double dt) {
  const PhaseGrid& G = *s.grid;
  if (field.Sprime.size() != static_cast<std::size_t>(G.nr()))
    throw InvalidArgument("relaxation_collision_step: field grid does not match state");
  const double a = cfg.relaxation / (cfg.epsilon * cfg.epsilon);
  const double c = cfg.model.chi0 / cfg.epsilon;
  const double Fv = a > 0.0 ? equilibrium_value(cfg.F, G.velocities()) : 0.0;
  const RadialDensity rho = rho_of(s);
  parallel_for(static_cast<std::size_t>(G.nr()), [&](std::size_t ii) {
    const int i = static_cast<int>(ii);
    const double sp = field.Sprime[i];
    const double kappa = a + c * G.omega_h() * std::abs(sp);
    if (kappa == 0.0) return;
    const double decay = std::exp(-kappa * dt);
    const double gain_factor = -std::expm1(-kappa * dt) / kappa;
    for (int k = 0; k < G.nw(); ++k) {
      const double w = G.speed(k);
      double* row = &s.g[G.index(i, k, 0)];
      for (int j = 0; j < G.nphi(); ++j) {
        const double source = a * Fv + c * w * positive_part(G.cos_avg(j) * sp);
        row[j] = row[j] * decay + source * rho.rho[i] * gain_factor;
      }
    }
  });
}

/// One Strang step of  eps d_t f + v.grad f = (1/eps)(rho F - f) + chi0 ((v.grad S)_+ rho - omega |grad S| f).
inline StepInfo scaled_kinetic_step(PhaseState& s, const ScaledConfig& cfg, double dt) {
  cfg.validate();
  const double dt_max = scaled_dt_max(*s.grid, cfg);
  if (!(dt > 0.0) || dt > dt_max * (1.0 + 1e-12)) throw CflViolation(dt, dt_max);
  StepInfo info;
  info.outflow += reduced_transport_step(s, 0.5 * dt / cfg.epsilon, cfg.recon);
  info.field = solve_radial(rho_of(s), cfg.model.alpha);
  relaxation_collision_step(s, info.field, cfg, dt);
  info.outflow += reduced_transport_step(s, 0.5 * dt / cfg.epsilon, cfg.recon);
  s.t += dt;
  return info;
}

/// Coefficients of  d_t rho = div(D grad rho) - chi~ div(rho grad S).
struct ParabolicParams {
  double D = 0.25;
  double chi_tilde = 0.0;
  double alpha = 0.0;
};

/// Limit coefficients: D = (1/2) int |v|^2 F, chi~ = chi0 J with
/// J = int (e.v)(v.e)_+ dv the directional first moment.
inline ParabolicParams parabolic_params(Equilibrium F, double chi0, const VelocitySet& vset, double alpha = 0.0) {
  check_equilibrium(F, vset);
  return {0.5 * equilibrium_second_moment(F, vset.radius()), chi0 * first_moment_coefficient(vset), alpha};
}

/// S' at the cell faces r_{i+1/2}, i = 0..n-1.
inline std::vector<double> face_gradient(const RadialDensity& rho, double alpha) {
  const std::size_t n = rho.size();
  std::vector<double> out(n);
  if (alpha == 0.0) {
    const auto a = rho.cell_moments();
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      acc += a[i];
      out[i] = -acc / ((static_cast<double>(i) + 1.0) * rho.dr);
    }
  } else {
    const auto f = solve_radial_alpha_pos(rho, alpha);
    for (std::size_t i = 0; i < n; ++i) out[i] = i + 1 < n ? 0.5 * (f.Sprime[i] + f.Sprime[i + 1]) : f.Sprime[i];
  }
  return out;
}

/// Positivity bound: explicit diffusion (2D/dr^2 per cell, with the
/// conventional 0.4 dr^2/D cap) plus limited upwind drift.
inline double parabolic_dt_max(const RadialDensity& rho, const ParabolicParams& pp) {
  const double dr = rho.dr;
  const auto sf = face_gradient(rho, pp.alpha);
  double umax = 0.0;
  for (double x : sf) umax = std::max(umax, std::abs(pp.chi_tilde * x));
  const double diff_rate = pp.D > 0.0 ? 2.5 * pp.D / (dr * dr) : 0.0;
  const double rate = diff_rate + 3.0 * umax / dr;
  return rate > 0.0 ? 1.0 / rate : std::numeric_limits<double>::infinity();
}

/// One explicit finite-volume step. Flux at face r_{i+1/2}:
///   r (-D (rho_{i+1} - rho_i)/dr + chi~ S' rho_face),
/// rho_face the minmod-limited upwind reconstruction. Zero flux at r = 0,
/// zero density outside the grid. Returns the mass leaving through r_max.
inline double parabolic_step(RadialDensity& rho, double dt, const ParabolicParams& pp) {
  const double dr = rho.dr;
  if (pp.D > 0.0 && dt > 0.4 * dr * dr / pp.D * (1.0 + 1e-12)) throw CflViolation(dt, 0.4 * dr * dr / pp.D);
  const double dt_max = parabolic_dt_max(rho, pp);
  if (dt > dt_max * (1.0 + 1e-12)) throw CflViolation(dt, dt_max);
  const int n = static_cast<int>(rho.size());
  const auto sf = face_gradient(rho, pp.alpha);
  auto val = [&](int i) { return i < n ? rho.rho[i] : 0.0; };
  auto slope = [&](int i) {
    if (i <= 0 || i >= n) return 0.0;
    return detail::minmod(val(i) - val(i - 1), val(i + 1) - val(i));
  };
  std::vector<double> flux(n + 1, 0.0);
  for (int f = 1; f <= n; ++f) {
    const int i = f - 1;  // face between cells i and i+1
    const double u = pp.chi_tilde * sf[i];
    const double up = u > 0.0 ? val(i) + 0.5 * slope(i) : (i + 1 < n ? val(i + 1) - 0.5 * slope(i + 1) : 0.0);
    flux[f] = f * dr * (-pp.D * (val(i + 1) - val(i)) / dr + u * up);
  }
  for (int i = 0; i < n; ++i) rho.rho[i] -= dt * (flux[i + 1] - flux[i]) / (rho.r[i] * dr);
  return 2.0 * pi * flux[n] * dt;
}

/// Advances rho to t_end with the largest admissible steps times `cfl`.
inline double parabolic_run(RadialDensity& rho, const ParabolicParams& pp, double t_end, double cfl = 0.9) {
  double t = 0.0, outflow = 0.0;
  while (t < t_end) {
    double dt = cfl * parabolic_dt_max(rho, pp);
    if (t + dt >= t_end) dt = t_end - t;
    outflow += parabolic_step(rho, dt, pp);
    t = t + dt >= t_end ? t_end : t + dt;
  }
  return outflow;
}

/// L^1 distance with measure 2 pi r dr on a common grid.
inline double l1_distance(const RadialDensity& a, const RadialDensity& b) {
  if (a.size() != b.size()) throw InvalidArgument("l1_distance: grid mismatch");
  std::vector<double> t(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) t[i] = std::abs(a.rho[i] - b.rho[i]) * a.r[i] * a.dr;
  return 2.0 * pi * pairwise_sum(t);
}

struct LimitStudyConfig {
  int nr = 128;
  double r_max = 6.0;
  VelocityKind kind = VelocityKind::Ball;
  double R = 1.0;
  int n_speed = 8;
  int n_angle = 32;
  double chi0 = 1.0;
  double alpha = 0.0;
  Equilibrium F = Equilibrium::UniformBall;
  double mass = 4.0;
  double sigma = 0.5;
  double t_end = 1.0;
  double cfl = 0.9;
  Reconstruction recon = Reconstruction::Muscl;
  std::vector<double> epsilons{0.4, 0.2, 0.1};
};

struct LimitStudyReport {
  std::vector<double> epsilons;
  std::vector<double> errors;
  std::vector<double> kinetic_mass;
  double parabolic_mass = 0.0;
  bool monotone = true;
};

/// Runs the scaled kinetic model for each epsilon from f0 = rho0 F and the
/// parabolic limit from rho0; reports the L^1 distance at t_end.
inline RadialDensity scaled_kinetic_run(const LimitStudyConfig& c, double eps, const RadialDensity& rho0) {
  auto vset = VelocitySet::make(c.kind, c.R, c.n_speed, c.n_angle);
  auto grid = std::make_shared<const PhaseGrid>(c.nr, c.r_max, vset);
  ScaledConfig sc{eps, c.F, {c.chi0, c.alpha}, 1.0, c.recon};
  std::vector<double> P(static_cast<std::size_t>(grid->nw()) * grid->nphi(),
                        equilibrium_value(c.F, grid->velocities()));
  PhaseState s = state_from_density(grid, rho0, P);
  const double dt_nominal = c.cfl * scaled_dt_max(*grid, sc);
  const long steps = static_cast<long>(std::ceil(c.t_end / dt_nominal - 1e-12));
  const double dt = c.t_end / static_cast<double>(steps);
  for (long n = 0; n < steps; ++n) scaled_kinetic_step(s, sc, dt);
  return rho_of(s);
}

inline LimitStudyReport limit_study(const LimitStudyConfig& c) {
  LimitStudyReport rep;
  const double dr = c.r_max / c.nr;
  const RadialDensity rho0 = radial_gaussian_density(c.nr, dr, c.mass, c.sigma);
  RadialDensity par = rho0;
  auto vset = VelocitySet::make(c.kind, c.R, c.n_speed, c.n_angle);
  parabolic_run(par, parabolic_params(c.F, c.chi0, vset, c.alpha), c.t_end, c.cfl);
  rep.parabolic_mass = par.mass();
  rep.epsilons = c.epsilons;
  rep.errors.assign(c.epsilons.size(), 0.0);
  rep.kinetic_mass.assign(c.epsilons.size(), 0.0);
  for (std::size_t n = 0; n < c.epsilons.size(); ++n) {
    const RadialDensity kin = scaled_kinetic_run(c, c.epsilons[n], rho0);
    rep.errors[n] = l1_distance(kin, par);
    rep.kinetic_mass[n] = kin.mass();
  }
  for (std::size_t n = 1; n < rep.errors.size(); ++n)
    if (rep.errors[n] > rep.errors[n - 1]) rep.monotone = false;
  return rep;
}

}  // namespace kinchem

#pragma once

#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "kinchem/chemfield.hpp"
#include "kinchem/common.hpp"
#include "kinchem/comparison.hpp"
#include "kinchem/kinsolver.hpp"

namespace kinchem {

enum class InitialFamily { Empty, UniformDisk, RadialGaussian, ComparisonDominated };
enum class VelocityProfile { Uniform, Beam };

inline std::string_view to_string(InitialFamily f) {
  switch (f) {
    case InitialFamily::Empty: return "empty";
    case InitialFamily::UniformDisk: return "uniform-disk";
    case InitialFamily::RadialGaussian: return "radial-gaussian";
    case InitialFamily::ComparisonDominated: return "comparison-dominated";
  }
  return "?";
}

inline InitialFamily initial_family_from_string(std::string_view s) {
  if (s == "empty") return InitialFamily::Empty;
  if (s == "uniform-disk") return InitialFamily::UniformDisk;
  if (s == "radial-gaussian") return InitialFamily::RadialGaussian;
  if (s == "comparison-dominated") return InitialFamily::ComparisonDominated;
  throw InvalidArgument("unknown initial family '" + std::string(s) +
                        "' (expected empty, uniform-disk, radial-gaussian or comparison-dominated)");
}

inline std::string_view to_string(VelocityProfile p) { return p == VelocityProfile::Uniform ? "uniform" : "beam"; }

inline VelocityProfile velocity_profile_from_string(std::string_view s) {
  if (s == "uniform") return VelocityProfile::Uniform;
  if (s == "beam") return VelocityProfile::Beam;
  throw InvalidArgument("unknown velocity profile '" + std::string(s) + "' (expected uniform or beam)");
}

struct InitialSpec {
  InitialFamily family = InitialFamily::UniformDisk;
  double mass = 1.0;
  double radius = 1.0;      // uniform-disk radius a
  double sigma = 1.0;       // radial-gaussian width
  double gamma = 0.5;       // comparison-dominated exponent
  double k0 = 0.1;          // comparison-dominated amplitude
  double r_supp = 1.0;      // comparison-dominated support radius
  double cap_factor = 10.0; // cap = cap_factor * k0
  VelocityProfile profile = VelocityProfile::Uniform;
  double beam_angle = 0.0;  // beam center phi0
  double beam_width = 0.5;  // full angular width of the beam
  friend bool operator==(const InitialSpec&, const InitialSpec&) = default;
};

/// Uniform disk of mass M and radius a, with exact cell area fractions.
inline RadialDensity uniform_disk_density(int nr, double dr, double M, double a) {
  if (!(a > 0.0)) throw InvalidArgument("uniform-disk radius must be positive");
  if (!(M >= 0.0)) throw InvalidArgument("mass must be nonnegative");
  std::vector<double> rho(nr, 0.0);
  const double level = M / (pi * a * a);
  for (int i = 0; i < nr; ++i) {
    const double lo = i * dr, hi = (i + 1) * dr;
    const double inner = std::min(lo, a), outer = std::min(hi, a);
    rho[i] = level * (outer * outer - inner * inner) / (hi * hi - lo * lo);
  }
  return {dr, std::move(rho)};
}

/// Radial Gaussian M/(2 pi sigma^2) exp(-r^2 / 2 sigma^2) by exact cell
/// integrals, renormalized so the grid mass is M.
inline RadialDensity radial_gaussian_density(int nr, double dr, double M, double sigma) {
  if (!(sigma > 0.0)) throw InvalidArgument("radial-gaussian sigma must be positive");
  if (!(M >= 0.0)) throw InvalidArgument("mass must be nonnegative");
  std::vector<double> rho(nr, 0.0);
  const double s2 = 2.0 * sigma * sigma;
  for (int i = 0; i < nr; ++i) {
    const double lo = i * dr, hi = (i + 1) * dr;
    // -expm1 difference avoids cancellation near the origin
    const double cell = std::exp(-lo * lo / s2) * -std::expm1(-(hi * hi - lo * lo) / s2);
    rho[i] = cell / (pi * (hi * hi - lo * lo));
  }
  RadialDensity d{dr, std::move(rho)};
  const double m = d.mass();
  if (m > 0.0)
    for (double& x : d.rho) x *= M / m;
  return d;
}

/// Velocity profile P(k, j) with sum_v P weight = 1.
inline std::vector<double> velocity_profile(const PhaseGrid& G, const InitialSpec& spec) {
  const int nw = G.nw(), np = G.nphi();
  std::vector<double> P(static_cast<std::size_t>(nw) * np, 0.0);
  double total = 0.0;
  for (int k = 0; k < nw; ++k)
    for (int j = 0; j < np; ++j) {
      bool on = true;
      if (spec.profile == VelocityProfile::Beam) {
        const double d = std::remainder(G.phi(j) - spec.beam_angle, 2.0 * pi);
        on = std::abs(d) <= 0.5 * spec.beam_width;
      }
      if (on) {
        P[static_cast<std::size_t>(k) * np + j] = 1.0;
        total += G.weight(k);
      }
    }
  if (total == 0.0) throw InvalidArgument("beam profile contains no velocity node; widen beam_width");
  for (double& x : P) x /= total;
  return P;
}

/// Phase-space state g(r, w, phi) = rho(r) P(w, phi).
inline PhaseState state_from_density(std::shared_ptr<const PhaseGrid> grid, const RadialDensity& rho,
                                     const std::vector<double>& P) {
  PhaseState s(grid);
  const PhaseGrid& G = *grid;
  if (rho.size() != static_cast<std::size_t>(G.nr())) throw InvalidArgument("density grid does not match phase grid");
  for (int i = 0; i < G.nr(); ++i)
    for (int k = 0; k < G.nw(); ++k)
      for (int j = 0; j < G.nphi(); ++j) s.at(i, k, j) = rho.rho[i] * P[static_cast<std::size_t>(k) * G.nphi() + j];
  return s;
}

/// f0 = beta min(k, cap) 1{r <= r_supp} with beta fixed by the target mass;
/// beta must not exceed 1 so that f0 <= k.
inline PhaseState comparison_dominated_state(std::shared_ptr<const PhaseGrid> grid, const InitialSpec& spec) {
  const Supersolution sup{spec.k0, spec.gamma};
  sup.validate();
  if (!(spec.r_supp > 0.0)) throw InvalidArgument("comparison-dominated r_supp must be positive");
  if (!(spec.cap_factor >= 1.0)) throw InvalidArgument("comparison-dominated cap_factor must be at least 1");
  const double cap = spec.cap_factor * spec.k0;
  PhaseState s(grid);
  const PhaseGrid& G = *grid;
  for (int i = 0; i < G.nr(); ++i) {
    if (G.r(i) > spec.r_supp) continue;
    for (int j = 0; j < G.nphi(); ++j) {
      const double k = std::min(k_radial(G.r(i), G.phi(j), sup), cap);
      for (int kk = 0; kk < G.nw(); ++kk) s.at(i, kk, j) = k;
    }
  }
  const double m1 = total_mass(s);
  if (m1 == 0.0) throw InvalidArgument("comparison-dominated support contains no grid cell");
  const double beta = spec.mass / m1;
  if (beta > 1.0)
    throw InvalidArgument("comparison-dominated: target mass " + std::to_string(spec.mass) +
                          " needs scale " + std::to_string(beta) + " > 1; increase k0 or r_supp");
  for (double& x : s.g) x *= beta;
  return s;
}

inline PhaseState make_initial_state(std::shared_ptr<const PhaseGrid> grid, const InitialSpec& spec) {
  const PhaseGrid& G = *grid;
  switch (spec.family) {
    case InitialFamily::Empty: return PhaseState(grid);
    case InitialFamily::UniformDisk:
      return state_from_density(grid, uniform_disk_density(G.nr(), G.dr(), spec.mass, spec.radius),
                                velocity_profile(G, spec));
    case InitialFamily::RadialGaussian:
      return state_from_density(grid, radial_gaussian_density(G.nr(), G.dr(), spec.mass, spec.sigma),
                                velocity_profile(G, spec));
    case InitialFamily::ComparisonDominated: return comparison_dominated_state(grid, spec);
  }
  throw InvalidArgument("unknown initial family");
}

}  // namespace kinchem

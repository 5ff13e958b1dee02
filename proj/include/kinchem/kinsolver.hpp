#pragma once

#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "kinchem/chemfield.hpp"
#include "kinchem/common.hpp"
#include "kinchem/velocity.hpp"

namespace kinchem {

/// Reduced phase space (r, w, phi) for radially symmetric solutions, phi the
/// angle from x to v. Radial cells [i dr, (i+1) dr]; angular cells follow
/// the velocity set (cell-centered nodes). All trigonometric quantities are
/// cell integrals so that the finite-volume fluxes telescope exactly.
class PhaseGrid {
public:
  PhaseGrid(int nr, double r_max, VelocitySet vset) : nr_(nr), r_max_(r_max), vset_(std::move(vset)) {
    if (nr < 4) throw InvalidArgument("radial grid needs at least 4 cells");
    if (!(r_max > 0.0) || !std::isfinite(r_max)) throw InvalidArgument("r_max must be positive");
    const int n = vset_.n_angle();
    if (n < 4 || n % 4 != 0) throw InvalidArgument("number of angle cells must be a positive multiple of 4");
    if (vset_.angle_offset() != 0.5) throw InvalidArgument("phase grid requires cell-centered angle nodes");
    dr_ = r_max / nr;
    dphi_ = vset_.angle_step();
    r_.resize(nr);
    r_face_.resize(nr + 1);
    for (int i = 0; i <= nr; ++i) r_face_[i] = i * dr_;
    for (int i = 0; i < nr; ++i) r_[i] = (i + 0.5) * dr_;
    // Faces phi_f = -pi + f dphi. Built from one quadrant and mirrored so that
    // phi -> -phi and phi -> pi - phi are exact symmetries of the tables.
    std::vector<double> st(n + 1), ct(n + 1);  // sin, cos of theta_f = f dphi
    const int q = n / 4;
    for (int f = 0; f <= q; ++f) {
      st[f] = f == 0 ? 0.0 : (f == q ? 1.0 : std::sin(f * dphi_));
      ct[f] = f == 0 ? 1.0 : (f == q ? 0.0 : std::cos(f * dphi_));
      st[2 * q - f] = st[f];
      ct[2 * q - f] = -ct[f];
    }
    for (int f = 0; f <= 2 * q; ++f) {
      st[n - f] = -st[f];
      ct[n - f] = ct[f];
    }
    st[2 * q] = 0.0;
    sin_face_.resize(n + 1);
    cos_face_.resize(n + 1);
    for (int f = 0; f <= n; ++f) {
      sin_face_[f] = st[f] == 0.0 ? 0.0 : -st[f];  // sin(theta - pi) = -sin(theta)
      cos_face_[f] = ct[f] == 0.0 ? 0.0 : -ct[f];
    }
    cos_int_.resize(n);
    cos_avg_.resize(n);
    sin_avg_.resize(n);
    for (int j = 0; j < n; ++j) {
      cos_int_[j] = sin_face_[j + 1] - sin_face_[j];
      cos_avg_[j] = cos_int_[j] / dphi_;
      sin_avg_[j] = (cos_face_[j] - cos_face_[j + 1]) / dphi_;
    }
    double om = 0.0;
    for (int k = 0; k < vset_.n_speed(); ++k) {
      double s = 0.0;
      for (int j = 0; j < n; ++j) s += positive_part(cos_avg_[j]);
      om += vset_.speed(k) * vset_.speed_weight(k) * s * dphi_;
    }
    omega_h_ = om;
  }

  int nr() const { return nr_; }
  int nw() const { return vset_.n_speed(); }
  int nphi() const { return vset_.n_angle(); }
  std::size_t size() const { return static_cast<std::size_t>(nr_) * nw() * nphi(); }
  std::size_t index(int i, int k, int j) const {
    return (static_cast<std::size_t>(i) * nw() + k) * nphi() + j;
  }
  double r_max() const { return r_max_; }
  double dr() const { return dr_; }
  double dphi() const { return dphi_; }
  double r(int i) const { return r_[i]; }
  double r_face(int i) const { return r_face_[i]; }
  const std::vector<double>& r_centers() const { return r_; }
  const VelocitySet& velocities() const { return vset_; }
  double speed(int k) const { return vset_.speed(k); }
  /// Velocity quadrature weight of node (k, j).
  double weight(int k) const { return vset_.speed_weight(k) * dphi_; }
  double phi(int j) const { return vset_.angle(j); }
  double sin_face(int f) const { return sin_face_[f]; }
  double cos_face(int f) const { return cos_face_[f]; }
  /// Integral of cos over angular cell j.
  double cos_integral(int j) const { return cos_int_[j]; }
  double cos_avg(int j) const { return cos_avg_[j]; }
  double sin_avg(int j) const { return sin_avg_[j]; }
  /// Discrete tumbling normalization sum_v w (cos)_+ weight; equals 2R^3/3
  /// (ball) or 2R^2 (circle) up to rounding when the speed rule is exact.
  double omega_h() const { return omega_h_; }
  /// Spatial measure 2 pi r_i dr of radial cell i.
  double cell_area(int i) const { return 2.0 * pi * r_[i] * dr_; }

private:
  int nr_;
  double r_max_;
  VelocitySet vset_;
  double dr_ = 0.0, dphi_ = 0.0, omega_h_ = 0.0;
  std::vector<double> r_, r_face_, sin_face_, cos_face_, cos_int_, cos_avg_, sin_avg_;
};

/// Discretized density g(r, w, phi) with its time stamp.
struct PhaseState {
  std::shared_ptr<const PhaseGrid> grid;
  double t = 0.0;
  std::vector<double> g;

  PhaseState() = default;
  explicit PhaseState(std::shared_ptr<const PhaseGrid> grid_, double t_ = 0.0)
      : grid(std::move(grid_)), t(t_), g(grid->size(), 0.0) {}

  double& at(int i, int k, int j) { return g[grid->index(i, k, j)]; }
  double at(int i, int k, int j) const { return g[grid->index(i, k, j)]; }
};

struct ModelParams {
  double chi0 = 1.0;
  double alpha = 0.0;
};

/// Radial face reconstruction: first-order upwind, or minmod-limited
/// piecewise-linear (MUSCL). The angular direction is always upwind.
enum class Reconstruction { Upwind, Muscl };

/// Largest dt keeping every cell's upwind outflow fraction at most 1. MUSCL
/// face values lie in [g/2, 3g/2], so its bound is 2/3 of the upwind one.
inline double transport_dt_max(const PhaseGrid& grid, Reconstruction recon = Reconstruction::Upwind) {
  double rate = 0.0;
  const double wmax = grid.speed(grid.nw() - 1);
  const double amp = recon == Reconstruction::Muscl ? 1.5 : 1.0;
  for (int i = 0; i < grid.nr(); ++i) {
    const double inv = 1.0 / (grid.r(i) * grid.dr() * grid.dphi());
    for (int j = 0; j < grid.nphi(); ++j) {
      const double s = grid.cos_integral(j);
      const double out = amp * (grid.r_face(i + 1) * positive_part(s) + grid.r_face(i) * negative_part(s)) +
                         grid.dr() * (positive_part(-grid.sin_face(j + 1)) + positive_part(grid.sin_face(j)));
      rate = std::max(rate, wmax * out * inv);
    }
  }
  return 1.0 / rate;
}

namespace detail {
constexpr double minmod(double a, double b) {
  if (a > 0.0 && b > 0.0) return a < b ? a : b;
  if (a < 0.0 && b < 0.0) return a > b ? a : b;
  return 0.0;
}
}  // namespace detail

/// Free transport  d_t g + w cos(phi) d_r g - (w sin(phi)/r) d_phi g = 0  in
/// the conservative form d_t(r g) + d_r(r w cos g) + d_phi(-w sin g) = 0.
/// The face r = 0 has zero length and carries no flux; characteristics
/// passing near the center are carried across by the angular term. Outflow
/// at r_max, no inflow. Returns the mass that left.
inline double reduced_transport_step(PhaseState& s, double dt, Reconstruction recon = Reconstruction::Upwind) {
  const PhaseGrid& G = *s.grid;
  const double dt_max = transport_dt_max(G, recon);
  if (!(dt >= 0.0) || dt > dt_max * (1.0 + 1e-12)) throw CflViolation(dt, dt_max);
  if (dt == 0.0) return 0.0;
  const int nr = G.nr(), nw = G.nw(), np = G.nphi();
  const double dr = G.dr();
  const bool muscl = recon == Reconstruction::Muscl;
  const std::vector<double>& g = s.g;
  std::vector<double> out(g.size());
  // Cell value of row i (zero outside the grid).
  auto val = [&](int i, int k, int j) { return i < nr ? g[G.index(i, k, j)] : 0.0; };
  // Limited slope (times dr) of cell i; zero in the first cell.
  auto slope = [&](int i, int k, int j) {
    if (i <= 0 || i >= nr) return 0.0;
    const double gi = val(i, k, j);
    return detail::minmod(gi - val(i - 1, k, j), val(i + 1, k, j) - gi);
  };
  // Upwind state at face i + 1/2 (between cells i and i+1) for flow sign c.
  auto face = [&](int i, int k, int j, double c) {
    if (c > 0.0) return muscl ? val(i, k, j) + 0.5 * slope(i, k, j) : val(i, k, j);
    if (i + 1 >= nr) return 0.0;
    return muscl ? val(i + 1, k, j) - 0.5 * slope(i + 1, k, j) : val(i + 1, k, j);
  };
  parallel_for(static_cast<std::size_t>(nr), [&](std::size_t ii) {
    const int i = static_cast<int>(ii);
    const double rp = G.r_face(i + 1), rm = G.r_face(i);
    const double coef = dt / (G.r(i) * dr * G.dphi());
    for (int k = 0; k < nw; ++k) {
      const double w = G.speed(k);
      const double* row = &g[G.index(i, k, 0)];
      double* dst = &out[G.index(i, k, 0)];
      const double* up = i + 1 < nr ? &g[G.index(i + 1, k, 0)] : nullptr;
      const double* dn = i > 0 ? &g[G.index(i - 1, k, 0)] : nullptr;
      for (int j = 0; j < np; ++j) {
        const double g0 = row[j];
        const double c = G.cos_integral(j);
        double fp, fm;
        if (muscl) {
          fp = rp * w * c * face(i, k, j, c);
          fm = i > 0 ? rm * w * c * face(i - 1, k, j, c) : 0.0;
        } else {
          fp = rp * w * c * (c > 0.0 ? g0 : (up ? up[j] : 0.0));
          fm = rm * w * c * (c > 0.0 ? (dn ? dn[j] : 0.0) : g0);
        }
        const double vp = -G.sin_face(j + 1), vm = -G.sin_face(j);
        const double hp = vp * w * dr * (vp > 0.0 ? g0 : row[(j + 1) % np]);
        const double hm = vm * w * dr * (vm > 0.0 ? row[(j + np - 1) % np] : g0);
        const double dh = hp - hm;
        dst[j] = g0 - coef * ((fp - fm) + dh);
      }
    }
  });
  // Outflow through r_max.
  double outflow = 0.0;
  for (int k = 0; k < nw; ++k) {
    double sk = 0.0;
    for (int j = 0; j < np; ++j) {
      const double c = G.cos_integral(j);
      if (c > 0.0) sk += G.r_face(nr) * G.speed(k) * c * face(nr - 1, k, j, c);
    }
    outflow += 2.0 * pi * G.velocities().speed_weight(k) * sk * dt;
  }
  s.g.swap(out);
  return outflow;
}

/// rho(r_i) = sum_v g weight.
inline RadialDensity rho_of(const PhaseState& s) {
  const PhaseGrid& G = *s.grid;
  std::vector<double> rho(G.nr(), 0.0);
  for (int i = 0; i < G.nr(); ++i) {
    double acc = 0.0;
    for (int k = 0; k < G.nw(); ++k) {
      const double* row = &s.g[G.index(i, k, 0)];
      std::span<const double> sp(row, static_cast<std::size_t>(G.nphi()));
      acc += G.weight(k) * pairwise_sum(sp);
    }
    rho[i] = acc;
  }
  return {G.dr(), std::move(rho)};
}

struct RadialCurrent {
  std::vector<double> j_par;   // component along x/|x|
  std::vector<double> j_perp;  // component along x^perp/|x|
};

/// Radial and tangential components of j = int v f dv, using cell-averaged
/// cos/sin so that j_par is exactly the flux the transport scheme moves.
inline RadialCurrent current_of(const PhaseState& s) {
  const PhaseGrid& G = *s.grid;
  RadialCurrent c{std::vector<double>(G.nr(), 0.0), std::vector<double>(G.nr(), 0.0)};
  for (int i = 0; i < G.nr(); ++i) {
    double jp = 0.0, jt = 0.0;
    for (int k = 0; k < G.nw(); ++k) {
      const double* row = &s.g[G.index(i, k, 0)];
      double a = 0.0, b = 0.0;
      for (int j = 0; j < G.nphi(); ++j) {
        a += row[j] * G.cos_avg(j);
        b += row[j] * G.sin_avg(j);
      }
      jp += G.speed(k) * G.weight(k) * a;
      jt += G.speed(k) * G.weight(k) * b;
    }
    c.j_par[i] = jp;
    c.j_perp[i] = jt;
  }
  return c;
}

inline double total_mass(const PhaseState& s) { return rho_of(s).mass(); }

/// Tumbling with a frozen field over dt. rho is invariant under the
/// collision operator, so per cell the update is the exact solution of the
/// linear ODE  g' = b rho - lambda g  with b = chi0 w (cos S')_+ and
/// lambda = chi0 omega_h |S'|.
inline void collision_step(PhaseState& s, const ChemField& field, double chi0, double dt) {
  const PhaseGrid& G = *s.grid;
  if (field.Sprime.size() != static_cast<std::size_t>(G.nr()))
    throw InvalidArgument("collision_step: field grid does not match state");
  if (!(dt >= 0.0)) throw InvalidArgument("collision_step: negative dt");
  const RadialDensity rho = rho_of(s);
  parallel_for(static_cast<std::size_t>(G.nr()), [&](std::size_t ii) {
    const int i = static_cast<int>(ii);
    const double sp = field.Sprime[i];
    const double lambda = chi0 * G.omega_h() * std::abs(sp);
    if (lambda == 0.0) return;
    const double decay = std::exp(-lambda * dt);
    // (1 - e^{-lambda dt}) / lambda without cancellation
    const double gain_factor = -std::expm1(-lambda * dt) / lambda;
    for (int k = 0; k < G.nw(); ++k) {
      const double w = G.speed(k);
      double* row = &s.g[G.index(i, k, 0)];
      for (int j = 0; j < G.nphi(); ++j) {
        const double b = chi0 * w * positive_part(G.cos_avg(j) * sp);
        row[j] = row[j] * decay + b * rho.rho[i] * gain_factor;
      }
    }
  });
}

struct StepInfo {
  double outflow = 0.0;
  ChemField field;
};

/// Strang composition: half transport, collision with the field of the
/// intermediate density, half transport. The step dt must satisfy
/// dt / 2 <= transport_dt_max.
inline StepInfo strang_step(PhaseState& s, const ModelParams& model, double dt) {
  StepInfo info;
  info.outflow += reduced_transport_step(s, 0.5 * dt);
  info.field = solve_radial(rho_of(s), model.alpha);
  collision_step(s, info.field, model.chi0, dt);
  info.outflow += reduced_transport_step(s, 0.5 * dt);
  s.t += dt;
  return info;
}

}  // namespace kinchem

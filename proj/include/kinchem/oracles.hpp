#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "kinchem/common.hpp"
#include "kinchem/quadrature.hpp"
#include "kinchem/velocity.hpp"

// Independent reference computations. Nothing here reuses the radial
// solver's discretization: the Cartesian solver has its own grid, upwind
// fluxes, field and collision update.

namespace kinchem::oracle {

// ---------------------------------------------------------------------------
// Quadrature oracles (adaptive Gauss-Kronrod, independent of the Simpson
// paths and of the closed forms they check)

struct Value {
  double value = 0.0;
  double error = 0.0;
};

/// int_V g(w, theta) dv over the ball (w dw dtheta) or the circle (R dtheta),
/// with angular breakpoints where g may have kinks.
inline Value velocity_integral(VelocityKind kind, double R, const std::function<double(double, double)>& g,
                               const std::vector<double>& angle_breaks = {}) {
  auto angular = [&](double w) {
    auto h = [&](double th) { return g(w, th); };
    return quad::gauss_kronrod(h, -pi, pi, 1e-13, 1e-300, angle_breaks);
  };
  if (kind == VelocityKind::Sphere) {
    const auto r = angular(R);
    return {R * r.value, R * r.error};
  }
  double err = 0.0;
  auto outer = [&](double w) {
    const auto r = angular(w);
    err += std::abs(w * r.error);
    return w * r.value;
  };
  const auto r = quad::gauss_kronrod(outer, 0.0, R, 1e-13);
  return {r.value, r.error + err * (R / 15.0)};
}

/// Angular kinks of (v.e)_+ for e at angle theta_e.
inline std::vector<double> kinks_for(double theta_e) {
  std::vector<double> b;
  for (double s : {-1.5 * pi, -0.5 * pi, 0.5 * pi, 1.5 * pi}) {
    const double t = theta_e + s;
    if (t > -pi && t < pi) b.push_back(t);
  }
  std::sort(b.begin(), b.end());
  return b;
}

/// int_V (v.e)_+ dv.
inline Value omega(VelocityKind kind, double R, Vec2 e) {
  const double th = std::atan2(e.y, e.x);
  const double n = norm(e);
  return velocity_integral(
      kind, R, [&](double w, double t) { return positive_part(w * n * std::cos(t - th)); }, kinks_for(th));
}

/// int_V (p.v)(v.q)_+ dv.
inline Value directional_first_moment(VelocityKind kind, double R, Vec2 p, Vec2 q) {
  const double th = std::atan2(q.y, q.x);
  return velocity_integral(
      kind, R,
      [&](double w, double t) {
        const Vec2 v{w * std::cos(t), w * std::sin(t)};
        return dot(p, v) * positive_part(dot(v, q));
      },
      kinks_for(th));
}

/// int_V v (x) v dv.
inline Mat2 second_moment_tensor(VelocityKind kind, double R) {
  auto comp = [&](int a, int b) {
    return velocity_integral(kind, R, [&](double w, double t) {
             const double v[2] = {w * std::cos(t), w * std::sin(t)};
             return v[a] * v[b];
           }).value;
  };
  return {comp(0, 0), comp(0, 1), comp(1, 0), comp(1, 1)};
}

/// Omega(gamma) by splitting [0, pi/2] at pi/4 and grading the singular
/// piece with theta = s^{2/(1-gamma)}.
inline Value omega_gamma(double gamma) {
  const double m = 2.0 / (1.0 - gamma);
  auto near = [&](double s) {
    if (s == 0.0) return 0.0;
    const double th = std::pow(s, m);
    const double ratio = th < 1e-8 ? 1.0 : th / std::sin(th);
    return m * std::pow(s, m - 1.0 - m * gamma) * std::pow(ratio, gamma);
  };
  auto far = [&](double th) { return std::pow(std::sin(th), -gamma); };
  const auto a = quad::gauss_kronrod(near, 0.0, std::pow(pi / 4.0, 1.0 / m), 1e-13);
  const auto b = quad::gauss_kronrod(far, pi / 4.0, pi / 2.0, 1e-13);
  return {1.0 + 2.0 / pi * (a.value + b.value), 2.0 / pi * (a.error + b.error)};
}

/// Omega(gamma) = 1 + B((1 - gamma)/2, 1/2) / pi.
inline double omega_gamma_beta(double gamma) { return 1.0 + std::beta(0.5 * (1.0 - gamma), 0.5) / pi; }

/// (1/2pi) int_{R^2} dzeta / (|zeta| (1 + |zeta|^2)) in polar coordinates.
inline Value kernel_constant() {
  auto radial = [](double r) {
    // (1/2pi) int_0^{2pi} dtheta * r / (r (1 + r^2)), the angular integral done by GK
    auto ang = [&](double) { return 1.0 / (1.0 + r * r); };
    return quad::gauss_kronrod(ang, 0.0, 2.0 * pi, 1e-14).value / (2.0 * pi);
  };
  const auto r = quad::gauss_kronrod_semi_infinite(radial, 0.0, 1e-12);
  return {r.value, r.error};
}

/// |grad B_alpha|(z) = (sqrt(alpha)/2pi) K_1(sqrt(alpha) z).
inline double bessel_gradient_closed(double z, double alpha) {
  const double k = std::sqrt(alpha);
  return k / (2.0 * pi) * std::cyl_bessel_k(1.0, k * z);
}

/// K = M int T dr - pi int T^2 dr for a continuous radial density, with
/// T(r) = int_r^inf l rho(l) dl by nested quadrature up to r_cut.
inline Value K_functional(const std::function<double(double)>& rho, double r_cut,
                          const std::vector<double>& breaks = {}) {
  auto T = [&](double r) {
    if (r >= r_cut) return 0.0;
    std::vector<double> b;
    for (double x : breaks)
      if (x > r && x < r_cut) b.push_back(x);
    return quad::gauss_kronrod([&](double l) { return l * rho(l); }, r, r_cut, 1e-13, 1e-300, b).value;
  };
  const double M = 2.0 * pi * T(0.0);
  auto integrand = [&](double r) {
    const double t = T(r);
    return M * t - pi * t * t;
  };
  const auto r = quad::gauss_kronrod(integrand, 0.0, r_cut, 1e-12, 1e-300, breaks);
  return {r.value, r.error};
}

/// S'(r) of -Delta S + alpha S = rho for a continuous radial density, by
/// direct angular quadrature of the gradient kernel:
///   S'(r) = -int_0^rcut l rho(l) int_0^{2pi} |grad B|(z) (r - l cos t) / z dt dl.
inline double alpha_gradient(const std::function<double(double)>& rho, double alpha, double r, double r_cut,
                             const std::vector<double>& breaks = {}) {
  auto inner = [&](double l) {
    if (l == 0.0) return 0.0;
    auto ang = [&](double t) {
      const double dx = r - l * std::cos(t), dy = -l * std::sin(t);
      const double z = std::hypot(dx, dy);
      if (z == 0.0) return 0.0;
      return bessel_gradient_closed(z, alpha) * dx / z;
    };
    return l * rho(l) * 2.0 * quad::gauss_kronrod(ang, 0.0, pi, 1e-11, 1e-300).value;
  };
  std::vector<double> b{r};
  for (double x : breaks)
    if (x > 0.0 && x < r_cut) b.push_back(x);
  std::sort(b.begin(), b.end());
  return -quad::gauss_kronrod(inner, 0.0, r_cut, 1e-9, 1e-300, b, 20000).value;
}

// ---------------------------------------------------------------------------
// Cartesian 2D x 2D reference solver

/// Square grid of n x n cells on [-L, L]^2 with a polar velocity set whose
/// angle nodes include 0, pi/2, pi, 3pi/2 (n_angle divisible by 4), so that
/// quarter-turn rotations map grid and velocity nodes onto themselves.
class CartesianGrid {
public:
  CartesianGrid(int n, double L, VelocitySet vset) : n_(n), L_(L), vset_(std::move(vset)) {
    if (n < 4 || n > 48) throw InvalidArgument("Cartesian oracle grid must have between 4 and 48 cells per side");
    if (vset_.n_angle() % 4 != 0 || vset_.angle_offset() != 0.0)
      throw InvalidArgument("Cartesian oracle needs grid-aligned velocity angles (offset 0, multiple of 4)");
    if (vset_.n_angle() > 16 || vset_.n_speed() > 16)
      throw InvalidArgument("Cartesian oracle is limited to 16 x 16 velocity nodes");
    h_ = 2.0 * L / n;
    x_.resize(n);
    for (int a = 0; a < n / 2; ++a) {
      x_[a] = -L + (a + 0.5) * h_;
      x_[n - 1 - a] = -x_[a];
    }
    if (n % 2 == 1) x_[n / 2] = 0.0;
    const int na = vset_.n_angle(), q = na / 4;
    cos_.resize(na);
    sin_.resize(na);
    // angle_j = -pi + j dtheta, built from one quadrant
    std::vector<double> c(q + 1), s(q + 1);
    for (int j = 0; j <= q; ++j) {
      const double t = j * vset_.angle_step();
      c[j] = j == q ? 0.0 : std::cos(t);
      s[j] = j == 0 ? 0.0 : (j == q ? 1.0 : std::sin(t));
    }
    for (int j = 0; j < na; ++j) {
      const int quad = j / q, rem = j % q;
      double cc = c[rem], ss = s[rem];  // angle rem*dtheta rotated by quad quarter turns
      for (int r = 0; r < quad; ++r) {
        const double t = cc;
        cc = -ss;
        ss = t;
      }
      // shift by -pi
      cos_[j] = cc == 0.0 ? 0.0 : -cc;
      sin_[j] = ss == 0.0 ? 0.0 : -ss;
    }
  }

  int n() const { return n_; }
  double L() const { return L_; }
  double h() const { return h_; }
  double x(int a) const { return x_[a]; }
  const VelocitySet& velocities() const { return vset_; }
  int nw() const { return vset_.n_speed(); }
  int nth() const { return vset_.n_angle(); }
  double vx(int k, int j) const { return vset_.speed(k) * cos_[j]; }
  double vy(int k, int j) const { return vset_.speed(k) * sin_[j]; }
  double weight(int k) const { return vset_.weight(k, 0); }
  std::size_t size() const { return static_cast<std::size_t>(n_) * n_ * nw() * nth(); }
  std::size_t index(int a, int b, int k, int j) const {
    return ((static_cast<std::size_t>(a) * n_ + b) * nw() + k) * nth() + j;
  }

private:
  int n_;
  double L_;
  VelocitySet vset_;
  double h_ = 0.0;
  std::vector<double> x_, cos_, sin_;
};

struct CartesianState {
  const CartesianGrid* grid = nullptr;
  double t = 0.0;
  std::vector<double> f;

  explicit CartesianState(const CartesianGrid& g) : grid(&g), f(g.size(), 0.0) {}
  double& at(int a, int b, int k, int j) { return f[grid->index(a, b, k, j)]; }
  double at(int a, int b, int k, int j) const { return f[grid->index(a, b, k, j)]; }
};

inline double cartesian_dt_max(const CartesianGrid& g) {
  double m = 0.0;
  for (int k = 0; k < g.nw(); ++k)
    for (int j = 0; j < g.nth(); ++j) m = std::max(m, std::abs(g.vx(k, j)) + std::abs(g.vy(k, j)));
  return g.h() / m;
}

/// Cell densities rho(a, b) = sum_v f weight.
inline std::vector<double> cartesian_rho(const CartesianState& s) {
  const auto& g = *s.grid;
  std::vector<double> rho(static_cast<std::size_t>(g.n()) * g.n(), 0.0);
  for (int a = 0; a < g.n(); ++a)
    for (int b = 0; b < g.n(); ++b) {
      double acc = 0.0;
      for (int k = 0; k < g.nw(); ++k)
        for (int j = 0; j < g.nth(); ++j) acc += s.at(a, b, k, j) * g.weight(k);
      rho[static_cast<std::size_t>(a) * g.n() + b] = acc;
    }
  return rho;
}

inline double cartesian_mass(const CartesianState& s) {
  const auto rho = cartesian_rho(s);
  return std::accumulate(rho.begin(), rho.end(), 0.0) * s.grid->h() * s.grid->h();
}

/// Radial field from the radialized density: S'(|x_c|) = -m(|x_c|) / (2 pi |x_c|)
/// with m the mass of all cells strictly closer to the origin plus half of
/// the cells at the same distance.
inline std::vector<double> cartesian_field(const CartesianState& s) {
  const auto& g = *s.grid;
  const int n = g.n();
  const auto rho = cartesian_rho(s);
  std::vector<std::pair<double, int>> order;
  order.reserve(static_cast<std::size_t>(n) * n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) order.push_back({g.x(a) * g.x(a) + g.x(b) * g.x(b), a * n + b});
  std::sort(order.begin(), order.end());
  std::vector<double> sp(static_cast<std::size_t>(n) * n, 0.0);
  const double h2 = g.h() * g.h();
  double below = 0.0;
  for (std::size_t p = 0; p < order.size();) {
    std::size_t q = p;
    double shell = 0.0;
    while (q < order.size() && order[q].first == order[p].first) shell += rho[order[q++].second] * h2;
    const double r = std::sqrt(order[p].first);
    const double m = below + 0.5 * shell;
    for (std::size_t u = p; u < q; ++u) sp[order[u].second] = r > 0.0 ? -m / (2.0 * pi * r) : 0.0;
    below += shell;
    p = q;
  }
  return sp;
}

/// Donor-cell upwind transport on the square with zero inflow.
inline void cartesian_transport(CartesianState& s, double dt) {
  const auto& g = *s.grid;
  const double dtmax = cartesian_dt_max(g);
  if (dt > dtmax * (1.0 + 1e-12)) throw CflViolation(dt, dtmax);
  const int n = g.n();
  std::vector<double> out(s.f.size());
  const double c = dt / g.h();
  auto val = [&](int a, int b, int k, int j) {
    return (a < 0 || b < 0 || a >= n || b >= n) ? 0.0 : s.at(a, b, k, j);
  };
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int k = 0; k < g.nw(); ++k)
        for (int j = 0; j < g.nth(); ++j) {
          const double vx = g.vx(k, j), vy = g.vy(k, j), f0 = s.at(a, b, k, j);
          const double fxp = vx * (vx > 0.0 ? f0 : val(a + 1, b, k, j));
          const double fxm = vx * (vx > 0.0 ? val(a - 1, b, k, j) : f0);
          const double fyp = vy * (vy > 0.0 ? f0 : val(a, b + 1, k, j));
          const double fym = vy * (vy > 0.0 ? val(a, b - 1, k, j) : f0);
          out[g.index(a, b, k, j)] = f0 - c * ((fxp - fxm) + (fyp - fym));
        }
  s.f.swap(out);
}

/// Exact tumbling update with frozen field: per cell and velocity
///   f' = chi0 (S' v.xhat)_+ rho - lambda f,  lambda = chi0 sum_v (S' v.xhat)_+ weight.
inline void cartesian_collision(CartesianState& s, const std::vector<double>& sp, double chi0, double dt) {
  const auto& g = *s.grid;
  const int n = g.n();
  const auto rho = cartesian_rho(s);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      const double r = std::hypot(g.x(a), g.x(b));
      const double field = sp[static_cast<std::size_t>(a) * n + b];
      if (r == 0.0 || field == 0.0) continue;
      const double ex = g.x(a) / r, ey = g.x(b) / r;
      double lambda = 0.0;
      for (int k = 0; k < g.nw(); ++k)
        for (int j = 0; j < g.nth(); ++j)
          lambda += chi0 * positive_part(field * (g.vx(k, j) * ex + g.vy(k, j) * ey)) * g.weight(k);
      if (lambda == 0.0) continue;
      const double decay = std::exp(-lambda * dt), gain = -std::expm1(-lambda * dt) / lambda;
      const double rh = rho[static_cast<std::size_t>(a) * n + b];
      for (int k = 0; k < g.nw(); ++k)
        for (int j = 0; j < g.nth(); ++j) {
          const double bias = chi0 * positive_part(field * (g.vx(k, j) * ex + g.vy(k, j) * ey));
          s.at(a, b, k, j) = s.at(a, b, k, j) * decay + bias * rh * gain;
        }
    }
}

/// Strang step: half transport, collision with the field of the
/// intermediate density, half transport.
inline void cartesian_step(CartesianState& s, double chi0, double dt) {
  cartesian_transport(s, 0.5 * dt);
  if (chi0 != 0.0) cartesian_collision(s, cartesian_field(s), chi0, dt);
  cartesian_transport(s, 0.5 * dt);
  s.t += dt;
}

/// Quarter-turn rotation (x, v) -> (Q x, Q v), Q(x, y) = (-y, x).
inline CartesianState rotate_quarter(const CartesianState& s) {
  const auto& g = *s.grid;
  CartesianState r(g);
  r.t = s.t;
  const int n = g.n(), q = g.nth() / 4;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int k = 0; k < g.nw(); ++k)
        for (int j = 0; j < g.nth(); ++j) r.at(n - 1 - b, a, k, (j + q) % g.nth()) = s.at(a, b, k, j);
  return r;
}

// ---------------------------------------------------------------------------
// Dispersion of free transport

/// Initial datum f0(x, v) on R^2 x V.
using PhaseFunction = std::function<double(Vec2, Vec2)>;

struct DispersionSetup {
  double R = 1.0;             // velocities in the ball of radius R
  double dv = 0.02;           // Cartesian velocity spacing
  double hx_per_sigma = 1.0 / 3.0;
  double sigma = 0.125;       // spatial width of the datum (sets the x grid)
  Vec2 center{0.0, 0.0};      // spatial center of the datum
  double window = 8.0;        // support half-width in units of sigma
};

struct DispersionSample {
  double t = 0.0;
  double p = 0.0, q = 0.0;
  double lhs = 0.0;  // ||f(t)||_{L^p_x L^q_v}
  double rhs = 0.0;  // t^{-2(1/q - 1/p)} ||f0||_{L^q_x L^p_v}
  bool holds = true;
};

struct DispersionReport {
  std::vector<DispersionSample> samples;
  double decay_exponent = 0.0;  // from the two largest times, for the first pair with p > q
  double expected_exponent = 0.0;
  bool passed = true;
};

namespace detail {

struct VelocityNodes {
  std::vector<Vec2> v;
  double weight = 0.0;
};

inline VelocityNodes ball_nodes(double R, double dv) {
  VelocityNodes out;
  const int m = static_cast<int>(std::ceil(R / dv));
  for (int a = -m; a <= m; ++a)
    for (int b = -m; b <= m; ++b) {
      const Vec2 v{a * dv, b * dv};
      if (dot(v, v) <= R * R) out.v.push_back(v);
    }
  out.weight = dv * dv;
  return out;
}

/// For each x node of a square grid, sum_v f(x, v)^e weight for every
/// exponent e, where f(., v) is supported in a square window around c(v).
struct MixedAccumulator {
  double hx;
  int half;  // grid spans [-half hx, half hx]
  std::vector<double> exps;
  std::vector<std::vector<double>> sums;
  MixedAccumulator(double hx_, double extent, std::vector<double> e) : hx(hx_), exps(std::move(e)) {
    half = static_cast<int>(std::ceil(extent / hx));
    const std::size_t n = static_cast<std::size_t>(2 * half + 1) * (2 * half + 1);
    sums.assign(exps.size(), std::vector<double>(n, 0.0));
  }
  int side() const { return 2 * half + 1; }
};

/// x^e with exact fast paths for the exponents used by the default battery.
inline double power(double x, double e) {
  if (e == 1.0) return x;
  if (e == 1.5) return x * std::sqrt(x);
  if (e == 2.0) return x * x;
  if (e == 3.0) return x * x * x;
  if (e == 4.0) return (x * x) * (x * x);
  return std::pow(x, e);
}

}  // namespace detail

/// Mixed norms of f(t, x, v) = f0(x - t v, v) and of f0 with swapped
/// exponents, evaluated from the exact characteristic shift on a spatial
/// grid with spacing hx_per_sigma * sigma and a Cartesian velocity grid
/// masked to the ball. Checks lhs <= (1 + slack) rhs for every pair and time.
inline DispersionReport dispersion_check(const PhaseFunction& f0, const DispersionSetup& setup,
                                         const std::vector<std::pair<double, double>>& pairs,
                                         const std::vector<double>& times, double slack = 0.05) {
  for (const auto& [p, q] : pairs)
    if (p < q || q < 1.0) throw InvalidArgument("dispersion_check: need 1 <= q <= p");
  DispersionReport rep;
  const auto nodes = detail::ball_nodes(setup.R, setup.dv);
  const double hx = setup.hx_per_sigma * setup.sigma;
  const double win = setup.window * setup.sigma;
  const int wn = static_cast<int>(std::ceil(win / hx));

  // Exponents needed: inner q for the evolved side, inner p for the initial side.
  auto evaluate = [&](double t, const std::vector<double>& exps) {
    const double extent = setup.R * t + win + std::max(std::abs(setup.center.x), std::abs(setup.center.y)) + hx;
    detail::MixedAccumulator acc(hx, extent, exps);
    const int side = acc.side();
    for (const Vec2& v : nodes.v) {
      const Vec2 c = setup.center + t * v;
      const int ca = static_cast<int>(std::lround(c.x / hx)), cb = static_cast<int>(std::lround(c.y / hx));
      for (int a = ca - wn; a <= ca + wn; ++a)
        for (int b = cb - wn; b <= cb + wn; ++b) {
          const int ia = a + acc.half, ib = b + acc.half;
          if (ia < 0 || ib < 0 || ia >= side || ib >= side) continue;
          const Vec2 x{a * hx, b * hx};
          const double f = f0(x - t * v, v);
          if (f == 0.0) continue;
          const double af = std::abs(f);
          for (std::size_t e = 0; e < exps.size(); ++e)
            acc.sums[e][static_cast<std::size_t>(ia) * side + ib] += detail::power(af, exps[e]) * nodes.weight;
        }
    }
    return acc;
  };
  auto mixed = [&](const detail::MixedAccumulator& acc, std::size_t e, double outer) {
    const double inner = acc.exps[e];
    double total = 0.0;
    for (double s : acc.sums[e])
      if (s > 0.0) total += std::pow(s, outer / inner);
    return std::pow(total * acc.hx * acc.hx, 1.0 / outer);
  };

  std::vector<double> exps;
  for (const auto& [p, q] : pairs) {
    exps.push_back(q);
    exps.push_back(p);
  }
  std::sort(exps.begin(), exps.end());
  exps.erase(std::unique(exps.begin(), exps.end()), exps.end());
  auto slot = [&](double e) {
    return static_cast<std::size_t>(std::find(exps.begin(), exps.end(), e) - exps.begin());
  };
  const auto init = evaluate(0.0, exps);
  for (double t : times) {
    const auto now = evaluate(t, exps);
    for (std::size_t n = 0; n < pairs.size(); ++n) {
      const auto [p, q] = pairs[n];
      DispersionSample smp;
      smp.t = t;
      smp.p = p;
      smp.q = q;
      smp.lhs = mixed(now, slot(q), p);
      smp.rhs = std::pow(t, -2.0 * (1.0 / q - 1.0 / p)) * mixed(init, slot(p), q);
      smp.holds = smp.lhs <= (1.0 + slack) * smp.rhs;
      if (!smp.holds) rep.passed = false;
      rep.samples.push_back(smp);
    }
  }
  // Decay exponent from the two largest times for the first pair with p > q.
  for (std::size_t n = 0; n < pairs.size(); ++n) {
    const auto [p, q] = pairs[n];
    if (p == q || times.size() < 2) continue;
    std::vector<const DispersionSample*> s;
    for (const auto& x : rep.samples)
      if (x.p == p && x.q == q) s.push_back(&x);
    std::sort(s.begin(), s.end(), [](auto* a, auto* b) { return a->t < b->t; });
    const auto* a = s[s.size() - 2];
    const auto* b = s[s.size() - 1];
    rep.decay_exponent = -std::log(b->lhs / a->lhs) / std::log(b->t / a->t);
    rep.expected_exponent = 2.0 * (1.0 / q - 1.0 / p);
    break;
  }
  return rep;
}

}  // namespace kinchem::oracle

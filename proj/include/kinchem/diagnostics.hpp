#pragma once

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "kinchem/chemfield.hpp"
#include "kinchem/common.hpp"
#include "kinchem/kinsolver.hpp"
#include "kinchem/thresholds.hpp"

namespace kinchem {

inline constexpr double nan_value = std::numeric_limits<double>::quiet_NaN();

struct NormSpec {
  double p = 3.0;
  double q = 1.5;
  friend bool operator==(const NormSpec&, const NormSpec&) = default;
};

inline std::vector<NormSpec> default_norms() { return {{3.0, 1.5}, {4.0, 2.0}}; }

struct DiagnosticsRecord {
  double t = 0.0;
  double M = 0.0;
  double I = 0.0;
  double dIdt = 0.0;
  double K = 0.0;
  std::vector<double> norms;    // aligned with the monitored NormSpec list
  double excess = nan_value;    // sup (f - k)_+, NaN when not tracked
};

/// I = (1/2) int |x|^2 rho dx = pi sum r^3 rho dr.
inline double second_moment(const RadialDensity& rho) {
  std::vector<double> t(rho.size());
  for (std::size_t i = 0; i < rho.size(); ++i) t[i] = rho.r[i] * rho.r[i] * rho.r[i] * rho.rho[i] * rho.dr;
  return pi * pairwise_sum(t);
}
inline double second_moment(const PhaseState& s) { return second_moment(rho_of(s)); }

/// dI/dt = int int (x.v) f = 2 pi sum r^2 j_par dr.
inline double current_moment(const PhaseState& s) {
  const auto c = current_of(s);
  const PhaseGrid& G = *s.grid;
  std::vector<double> t(G.nr());
  for (int i = 0; i < G.nr(); ++i) t[i] = G.r(i) * G.r(i) * c.j_par[i] * G.dr();
  return 2.0 * pi * pairwise_sum(t);
}

/// K = M int T dr - pi int T^2 dr with tail T(r) = int_r^inf l rho dl,
/// T evaluated at cell centers from the same cell moments as the mass.
inline double K_functional(const RadialDensity& rho, double M) {
  const auto T = half_cell_tail(rho.cell_moments());
  std::vector<double> t(T.size());
  for (std::size_t i = 0; i < T.size(); ++i) t[i] = (M * T[i] - pi * T[i] * T[i]) * rho.dr;
  return pairwise_sum(t);
}

/// Equivalent form (M/2) int T dr + pi int (M/2pi - T) T dr; each term is
/// nonnegative when M is the mass of rho.
inline double K_functional_half_form(const RadialDensity& rho, double M) {
  const auto T = half_cell_tail(rho.cell_moments());
  std::vector<double> t(T.size());
  for (std::size_t i = 0; i < T.size(); ++i)
    t[i] = (0.5 * M * T[i] + pi * (M / (2.0 * pi) - T[i]) * T[i]) * rho.dr;
  return pairwise_sum(t);
}

/// Upper bound (1/2pi) M^{3/2} sqrt(2 I) for K.
inline double K_bound(double M, double I) { return std::pow(M, 1.5) * std::sqrt(2.0 * I) / (2.0 * pi); }

/// 2 < p, 1 < q, 0 <= 1/q - 1/p < 1/2.
inline bool admissible_exponents(double p, double q, std::string* why = nullptr) {
  auto fail = [&](const char* msg) {
    if (why) *why = msg;
    return false;
  };
  if (!(p > 2.0)) return fail("need p > 2");
  if (!(q > 1.0)) return fail("need q > 1");
  const double d = 1.0 / q - 1.0 / p;
  if (!(d >= 0.0)) return fail("need 1/q - 1/p >= 0 (q <= p)");
  if (!(d < 0.5)) return fail("need 1/q - 1/p < 1/2");
  return true;
}

/// Mixed norm: per radial cell the L^q velocity norm, then the L^p norm in
/// space with measure 2 pi r dr.
inline double lplq_norm(const PhaseState& s, double p, double q) {
  std::string why;
  if (!admissible_exponents(p, q, &why))
    throw InvalidArgument("inadmissible exponents (p=" + std::to_string(p) + ", q=" + std::to_string(q) + "): " + why);
  const PhaseGrid& G = *s.grid;
  std::vector<double> outer(G.nr());
  std::vector<double> inner(static_cast<std::size_t>(G.nw()) * G.nphi());
  for (int i = 0; i < G.nr(); ++i) {
    for (int k = 0; k < G.nw(); ++k)
      for (int j = 0; j < G.nphi(); ++j)
        inner[static_cast<std::size_t>(k) * G.nphi() + j] = std::pow(s.at(i, k, j), q) * G.weight(k);
    const double vq = std::pow(pairwise_sum(inner), 1.0 / q);
    outer[i] = std::pow(vq, p) * G.cell_area(i);
  }
  return std::pow(pairwise_sum(outer), 1.0 / p);
}

inline DiagnosticsRecord make_record(const PhaseState& s, const std::vector<NormSpec>& norms) {
  DiagnosticsRecord rec;
  const RadialDensity rho = rho_of(s);
  rec.t = s.t;
  rec.M = rho.mass();
  rec.I = second_moment(rho);
  rec.dIdt = current_moment(s);
  rec.K = K_functional(rho, rec.M);
  for (const auto& n : norms) rec.norms.push_back(lplq_norm(s, n.p, n.q));
  return rec;
}

struct Mu0Report {
  double value = 0.0;  // dI/dt(0) + chi0 omega K(0)
  double bound = 0.0;  // R sqrt(M) sqrt(2 I0) + chi0 M^{3/2} R^3 sqrt(2 I0) / (3 pi)
  bool within_bound = true;
};

inline Mu0Report mu0_of(const PhaseState& s0, double K0, double chi0, double R) {
  Mu0Report r;
  const RadialDensity rho = rho_of(s0);
  const double M = rho.mass(), I0 = second_moment(rho);
  r.value = current_moment(s0) + chi0 * (2.0 * R * R * R / 3.0) * K0;
  r.bound = mu0_bound(M, I0, chi0, R);
  r.within_bound = r.value <= r.bound * (1.0 + 1e-12) + 1e-300;
  return r;
}

struct VirialParams {
  ThresholdModel model = ThresholdModel::BallKinetic;
  double chi0 = 1.0;
  double R = 1.0;
  double dr = 0.0;  // radial spacing, for the discretization allowance
};

struct VirialReport {
  bool holds = true;
  double first_violation_time = nan_value;
  double max_excess = -std::numeric_limits<double>::infinity();  // max of lhs - (bound + tol)
  double delta = 0.0;
  double mu0 = 0.0;
  double I0 = 0.0;
  double tolerance = 0.0;
  double projected_vanishing_time = std::numeric_limits<double>::infinity();
  bool forced_vanishing = false;
  std::string message;
};

/// Time at which I0 + mu t - delta t^2 / 2 reaches zero (infinity if never).
inline double projected_zero_time(double I0, double mu, double d) {
  if (d > 0.0) return (mu + std::sqrt(mu * mu + 2.0 * d * I0)) / d;
  if (d == 0.0 && mu < 0.0) return I0 / (-mu);
  if (d < 0.0 && mu < 0.0) {
    const double disc = mu * mu + 2.0 * d * I0;
    if (disc >= 0.0) return (mu + std::sqrt(disc)) / d;
  }
  return std::numeric_limits<double>::infinity();
}

/// Checks dI/dt(t) <= dI/dt(0) - delta t + chi0 omega K(0) + tol (1 + t) at
/// every sample (t measured from the first record) and projects the time at
/// which the resulting quadratic upper bound on I vanishes.
inline VirialReport virial_tracker(const std::vector<DiagnosticsRecord>& series, const VirialParams& vp) {
  VirialReport rep;
  if (series.empty()) {
    rep.message = "empty series";
    return rep;
  }
  const auto& r0 = series.front();
  const double om = omega_of(vp.model, vp.R);
  rep.delta = delta(vp.model, r0.M, vp.chi0, vp.R);
  rep.mu0 = r0.dIdt + vp.chi0 * om * r0.K;
  rep.I0 = r0.I;
  const double scale =
      std::max({std::abs(r0.dIdt), vp.chi0 * om * r0.K, vp.R * std::sqrt(2.0 * r0.M * r0.I)});
  rep.tolerance = 1e-6 * scale + 10.0 * vp.dr * vp.dr;
  for (const auto& rec : series) {
    const double t = rec.t - r0.t;
    const double bound = r0.dIdt - rep.delta * t + vp.chi0 * om * r0.K;
    const double excess = rec.dIdt - (bound + rep.tolerance * (1.0 + t));
    rep.max_excess = std::max(rep.max_excess, excess);
    if (excess > 0.0 && rep.holds) {
      rep.holds = false;
      rep.first_violation_time = rec.t;
    }
  }
  rep.projected_vanishing_time = projected_zero_time(rep.I0, rep.mu0, rep.delta);
  rep.forced_vanishing = rep.delta > 0.0 && std::isfinite(rep.projected_vanishing_time);
  if (!rep.forced_vanishing)
    rep.message = "no forced vanishing";
  else
    rep.message = "second moment forced to vanish by t = " + std::to_string(r0.t + rep.projected_vanishing_time);
  if (!rep.holds) rep.message += "; virial inequality violated at t = " + std::to_string(rep.first_violation_time);
  if (std::isfinite(rep.projected_vanishing_time)) rep.projected_vanishing_time += r0.t;
  return rep;
}

enum class Verdict { GlobalLooking, BlowupSuspected };

inline std::string_view to_string(Verdict v) {
  return v == Verdict::GlobalLooking ? "global-looking" : "blow-up suspected";
}

struct DetectorParams {
  double growth_factor = 1e3;
  double t_end = 0.0;
  bool virial = false;  // use the virial projection (alpha = 0, kinetic model)
  VirialParams vp;
};

struct DetectorVerdict {
  Verdict verdict = Verdict::GlobalLooking;
  std::string reason;
  double time = nan_value;                  // time of the first triggering sample
  double projected_vanishing_time = nan_value;  // projection from the initial sample
  std::vector<double> max_norm_ratio;       // per monitored norm, max over samples of norm/initial
};

/// Numerical proxy for leaving every admissible mixed Lebesgue space: fires
/// when a monitored norm grows by growth_factor, or when the virial upper
/// bound restarted at some sample t1 forces I to vanish before t_end:
///   t1 + (mu1 + sqrt(mu1^2 + 2 delta I1)) / delta <= t_end,
///   mu1 = dI/dt(t1) + chi0 omega K(t1).
inline DetectorVerdict blowup_detector(const std::vector<DiagnosticsRecord>& series, const DetectorParams& dp) {
  DetectorVerdict v;
  if (series.empty()) {
    v.reason = "no samples";
    return v;
  }
  const auto& r0 = series.front();
  v.max_norm_ratio.assign(r0.norms.size(), 0.0);
  double d = 0.0, om = 0.0;
  if (dp.virial) {
    d = delta(dp.vp.model, r0.M, dp.vp.chi0, dp.vp.R);
    om = omega_of(dp.vp.model, dp.vp.R);
    if (d > 0.0)
      v.projected_vanishing_time = r0.t + projected_zero_time(r0.I, r0.dIdt + dp.vp.chi0 * om * r0.K, d);
  }
  for (const auto& rec : series) {
    for (std::size_t n = 0; n < rec.norms.size() && n < r0.norms.size(); ++n) {
      if (r0.norms[n] > 0.0) {
        const double ratio = rec.norms[n] / r0.norms[n];
        v.max_norm_ratio[n] = std::max(v.max_norm_ratio[n], ratio);
        if (v.verdict == Verdict::GlobalLooking && !(ratio < dp.growth_factor)) {
          v.verdict = Verdict::BlowupSuspected;
          v.time = rec.t;
          v.reason = "monitored norm " + std::to_string(n) + " grew by factor " + std::to_string(ratio);
        }
      }
    }
    if (dp.virial && d > 0.0 && v.verdict == Verdict::GlobalLooking && rec.M > 0.0) {
      const double mu = rec.dIdt + dp.vp.chi0 * om * rec.K;
      const double tz = rec.t + projected_zero_time(rec.I, mu, d);
      if (tz <= dp.t_end) {
        v.verdict = Verdict::BlowupSuspected;
        v.time = rec.t;
        v.reason = "virial bound from t = " + std::to_string(rec.t) + " forces I to vanish by t = " +
                   std::to_string(tz) + " <= t_end";
      }
    }
  }
  if (v.verdict == Verdict::GlobalLooking) v.reason = "monitored norms bounded through the final sample";
  return v;
}

/// %.17g, with nan/inf spelled as in C.
inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string norm_column_name(const NormSpec& n) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "norm_p%gq%g", n.p, n.q);
  return buf;
}

inline void write_csv_header(std::ostream& os, const std::vector<NormSpec>& norms) {
  os << "t,M,I,dIdt,K";
  for (const auto& n : norms) os << ',' << norm_column_name(n);
  os << ",excess\n";
}

inline void write_csv_row(std::ostream& os, const DiagnosticsRecord& r) {
  os << format_double(r.t) << ',' << format_double(r.M) << ',' << format_double(r.I) << ','
     << format_double(r.dIdt) << ',' << format_double(r.K);
  for (double x : r.norms) os << ',' << format_double(x);
  os << ',' << format_double(r.excess) << '\n';
}

}  // namespace kinchem

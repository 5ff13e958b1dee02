#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <string_view>

#include "kinchem/common.hpp"
#include "kinchem/velocity.hpp"

namespace kinchem {

enum class ThresholdModel { BallKinetic, SphereKinetic, ParabolicUniformF };

inline std::string_view to_string(ThresholdModel m) {
  switch (m) {
    case ThresholdModel::BallKinetic: return "ball";
    case ThresholdModel::SphereKinetic: return "sphere";
    case ThresholdModel::ParabolicUniformF: return "parabolic";
  }
  return "?";
}

inline ThresholdModel threshold_model_from_string(std::string_view s) {
  if (s == "ball") return ThresholdModel::BallKinetic;
  if (s == "sphere") return ThresholdModel::SphereKinetic;
  if (s == "parabolic") return ThresholdModel::ParabolicUniformF;
  throw InvalidArgument("unknown model '" + std::string(s) + "' (expected ball, sphere or parabolic)");
}

inline ThresholdModel kinetic_model(VelocityKind k) {
  return k == VelocityKind::Ball ? ThresholdModel::BallKinetic : ThresholdModel::SphereKinetic;
}

namespace detail {
inline void check_positive(double chi0, double R) {
  if (!(chi0 > 0.0) || !(R > 0.0) || !std::isfinite(chi0) || !std::isfinite(R))
    throw InvalidArgument("chi0 and R must be positive and finite");
}
}  // namespace detail

/// Mass above which the virial argument forces finite-time blow-up:
/// 32 pi/(chi0 |V|) for the ball, 16 pi/(chi0 |V|) for the circle, and the
/// Keller-Segel threshold 8 pi D / chi~ of the uniform-F parabolic limit.
inline double critical_mass(ThresholdModel model, double chi0, double R) {
  detail::check_positive(chi0, R);
  switch (model) {
    case ThresholdModel::BallKinetic: return 32.0 / (chi0 * R * R);
    case ThresholdModel::SphereKinetic: return 8.0 / (chi0 * R);
    case ThresholdModel::ParabolicUniformF: return 16.0 / (chi0 * R * R);
  }
  return 0.0;
}

/// Decay rate in the virial inequality d^2 I/dt^2 <= -delta. For the
/// parabolic model it is the constant rate -dI/dt of I = (1/2) int |x|^2 rho
/// under dt rho = D Lap rho - chi~ div(rho grad S), D = R^2/4,
/// chi~ = chi0 pi R^4 / 8.
inline double delta(ThresholdModel model, double M, double chi0, double R) {
  detail::check_positive(chi0, R);
  if (!(M >= 0.0)) throw InvalidArgument("mass must be nonnegative");
  switch (model) {
    case ThresholdModel::BallKinetic: return R * R * M * (chi0 * R * R * M / 32.0 - 1.0);
    case ThresholdModel::SphereKinetic: return R * R * M * (chi0 * R * M / 8.0 - 1.0);
    case ThresholdModel::ParabolicUniformF: return 0.5 * R * R * M * (chi0 * R * R * M / 16.0 - 1.0);
  }
  return 0.0;
}

/// Tumbling normalization omega = int (v.e)_+ dv of the kinetic model.
inline double omega_of(ThresholdModel model, double R) {
  switch (model) {
    case ThresholdModel::BallKinetic: return 2.0 * R * R * R / 3.0;
    case ThresholdModel::SphereKinetic: return 2.0 * R * R;
    case ThresholdModel::ParabolicUniformF: break;
  }
  throw InvalidArgument("omega is defined for kinetic models only");
}

/// Kinetic threshold when the velocity second moment is replaced by the
/// sharp value M m2 (m2 = int |v|^2 F dv): the virial balance
/// m2 M = chi0 J M^2 / (4 pi) with J the directional first-moment coefficient.
inline double kinetic_sharp_threshold(double m2, double J, double chi0) {
  return 4.0 * pi * m2 / (chi0 * J);
}

/// Keller-Segel threshold 8 pi D / chi~ in the plane.
inline double parabolic_threshold(double D, double chi_tilde) { return 8.0 * pi * D / chi_tilde; }

struct CriterionResult {
  bool satisfied = false;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;  // rhs - lhs; positive when satisfied
};

struct AlphaCriterionReport {
  bool applicable = false;
  std::string message;
  double delta = 0.0;
  double eta = 0.0;
  double A = 0.0;
  double mu0 = 0.0;
  double I0 = 0.0;
  double I0_bound = 0.0;  // largest I0 meeting the simplified condition
  CriterionResult sharp;
  CriterionResult simplified;
};

/// Blow-up criteria for alpha > 0 (ball). Sharp condition
///   I0 + sqrt(delta) mu0 / eta < delta^2 / (2 eta^2),
/// simplified condition  X = eta^2 2 I0 / delta < (sqrt(delta + A^2) - A)^2
/// with A = R sqrt(M) + chi0 M^{3/2} R^3 / (3 pi). The kernel constant is an
/// input so that callers can pass either the quadrature value or pi/2.
inline AlphaCriterionReport alpha_blowup_criterion(double I0, double mu0, double M, double chi0, double R,
                                                   double alpha, double kernel_const) {
  AlphaCriterionReport rep;
  if (!(alpha >= 0.0)) throw InvalidArgument("alpha must be nonnegative");
  if (!std::isfinite(I0) || !std::isfinite(mu0) || !(I0 >= 0.0))
    throw InvalidArgument("I0 must be finite and nonnegative, mu0 finite");
  rep.delta = delta(ThresholdModel::BallKinetic, M, chi0, R);
  rep.I0 = I0;
  rep.mu0 = mu0;
  if (!(rep.delta > 0.0)) {
    rep.applicable = false;
    rep.message = "subcritical, criterion inapplicable";
    return rep;
  }
  rep.applicable = true;
  const double d = rep.delta;
  rep.eta = std::sqrt(alpha) * chi0 * std::pow(M, 1.5) * std::pow(R, 4) * kernel_const;
  rep.A = R * std::sqrt(M) + chi0 * std::pow(M, 1.5) * R * R * R / (3.0 * pi);
  const double root = d / (std::sqrt(d + rep.A * rep.A) + rep.A);  // sqrt(d + A^2) - A
  if (rep.eta == 0.0) {
    const double inf = std::numeric_limits<double>::infinity();
    rep.sharp = {true, I0, inf, inf};
    rep.simplified = {true, 0.0, root * root, root * root};
    rep.I0_bound = inf;
    rep.message = "alpha = 0: both conditions hold";
    return rep;
  }
  const double e = rep.eta;
  rep.sharp.lhs = I0 + std::sqrt(d) * mu0 / e;
  rep.sharp.rhs = d * d / (2.0 * e * e);
  rep.sharp.margin = rep.sharp.rhs - rep.sharp.lhs;
  rep.sharp.satisfied = rep.sharp.lhs < rep.sharp.rhs;
  rep.simplified.lhs = e * e * 2.0 * I0 / d;
  rep.simplified.rhs = root * root;
  rep.simplified.margin = rep.simplified.rhs - rep.simplified.lhs;
  rep.simplified.satisfied = rep.simplified.lhs < rep.simplified.rhs;
  rep.I0_bound = root * root * d / (2.0 * e * e);
  rep.message = rep.sharp.satisfied ? "blow-up criterion satisfied" : "blow-up criterion not satisfied";
  return rep;
}

/// Upper bound for mu0 from the second moment:
/// R sqrt(M) sqrt(2 I0) + chi0 M^{3/2} R^3 sqrt(2 I0) / (3 pi).
inline double mu0_bound(double M, double I0, double chi0, double R) {
  const double s = std::sqrt(2.0 * I0);
  return R * std::sqrt(M) * s + chi0 * std::pow(M, 1.5) * R * R * R * s / (3.0 * pi);
}

}  // namespace kinchem

#pragma once

#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "kinchem/common.hpp"
#include "kinchem/quadrature.hpp"

namespace kinchem {

enum class VelocityKind { Ball, Sphere };

inline std::string_view to_string(VelocityKind k) {
  return k == VelocityKind::Ball ? "ball" : "sphere";
}

inline VelocityKind velocity_kind_from_string(std::string_view s) {
  if (s == "ball") return VelocityKind::Ball;
  if (s == "sphere") return VelocityKind::Sphere;
  throw InvalidArgument("unknown velocity set kind '" + std::string(s) + "'");
}

struct VelocityNode {
  double speed;
  double angle;
  double weight;
};

/// Admissible velocities V: the disk B(0,R) with 2D Lebesgue measure or the
/// circle S(0,R) with arclength measure, discretized as a tensor product of
/// speeds and uniformly spaced angles. The angular cells are
/// [-pi + j*dphi, -pi + (j+1)*dphi) with nodes placed at `angle_offset`
/// (in units of dphi) inside each cell; 0.5 gives cell centers.
class VelocitySet {
public:
  static VelocitySet ball(double R, int n_speed = 16, int n_angle = 32,
                          double angle_offset = 0.5) {
    if (n_speed < 1) throw InvalidArgument("ball velocity set needs at least one speed node");
    VelocitySet v(VelocityKind::Ball, R, n_angle, angle_offset);
    const auto gl = quad::gauss_legendre(n_speed, 0.0, R);
    v.speeds_ = gl.nodes;
    v.speed_weights_.resize(n_speed);
    // measure w dw
    for (int k = 0; k < n_speed; ++k) v.speed_weights_[k] = gl.weights[k] * gl.nodes[k];
    return v;
  }

  static VelocitySet sphere(double R, int n_angle = 32, double angle_offset = 0.5) {
    VelocitySet v(VelocityKind::Sphere, R, n_angle, angle_offset);
    v.speeds_ = {R};
    v.speed_weights_ = {R};
    return v;
  }

  static VelocitySet make(VelocityKind kind, double R, int n_speed, int n_angle,
                          double angle_offset = 0.5) {
    return kind == VelocityKind::Ball ? ball(R, n_speed, n_angle, angle_offset)
                                      : sphere(R, n_angle, angle_offset);
  }

  VelocityKind kind() const { return kind_; }
  double radius() const { return R_; }
  int n_speed() const { return static_cast<int>(speeds_.size()); }
  int n_angle() const { return n_angle_; }
  std::size_t size() const { return speeds_.size() * static_cast<std::size_t>(n_angle_); }
  double angle_step() const { return 2.0 * pi / n_angle_; }
  double angle_offset() const { return offset_; }

  double speed(int k) const { return speeds_[k]; }
  /// Radial measure weight of speed node k (w dw for the ball, R for the circle).
  double speed_weight(int k) const { return speed_weights_[k]; }
  double angle(int j) const { return -pi + (j + offset_) * angle_step(); }
  double weight(int k, int /*j*/) const { return speed_weights_[k] * angle_step(); }

  VelocityNode node(int k, int j) const { return {speed(k), angle(j), weight(k, j)}; }
  Vec2 vector(int k, int j) const {
    const double a = angle(j);
    return {speeds_[k] * std::cos(a), speeds_[k] * std::sin(a)};
  }

  std::vector<VelocityNode> nodes() const {
    std::vector<VelocityNode> out;
    out.reserve(size());
    for (int k = 0; k < n_speed(); ++k)
      for (int j = 0; j < n_angle_; ++j) out.push_back(node(k, j));
    return out;
  }

  /// |V| in closed form.
  double measure() const { return kind_ == VelocityKind::Ball ? pi * R_ * R_ : 2.0 * pi * R_; }

  /// Sum of quadrature weights.
  double weight_sum() const {
    double s = 0.0;
    for (double w : speed_weights_) s += w;
    return s * 2.0 * pi;
  }

private:
  VelocitySet(VelocityKind kind, double R, int n_angle, double offset)
      : kind_(kind), R_(R), n_angle_(n_angle), offset_(offset) {
    if (!(R > 0.0) || !std::isfinite(R)) throw InvalidArgument("velocity radius must be positive");
    if (n_angle < 1) throw InvalidArgument("velocity set needs at least one angle node");
    if (!(offset >= 0.0 && offset < 1.0)) throw InvalidArgument("angle offset must lie in [0,1)");
  }

  VelocityKind kind_;
  double R_;
  int n_angle_;
  double offset_;
  std::vector<double> speeds_;
  std::vector<double> speed_weights_;
};

/// Tumbling normalization: integral of (v'.e)_+ over V for any unit vector e.
inline double omega(const VelocitySet& v) {
  const double R = v.radius();
  return v.kind() == VelocityKind::Ball ? 2.0 * R * R * R / 3.0 : 2.0 * R * R;
}

/// Coefficient c with  integral (p.v)(v.q)_+ dv = c (p.q).
inline double first_moment_coefficient(const VelocitySet& v) {
  const double R = v.radius();
  return v.kind() == VelocityKind::Ball ? pi * R * R * R * R / 8.0 : pi * R * R * R / 2.0;
}

inline double directional_first_moment(const VelocitySet& v, Vec2 p, Vec2 q) {
  return first_moment_coefficient(v) * dot(p, q);
}

/// Integral of v (x) v over V, a multiple of the identity.
inline Mat2 second_moment_tensor(const VelocitySet& v) {
  const double R = v.radius();
  const double c = v.kind() == VelocityKind::Ball ? pi * R * R * R * R / 4.0 : pi * R * R * R;
  return {c, 0.0, 0.0, c};
}

}  // namespace kinchem

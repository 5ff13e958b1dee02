#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "kinchem/oracles.hpp"
#include "kinchem/velocity.hpp"

using namespace kinchem;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(a), std::abs(b)); }

}  // namespace

TEST(VelocitySet, BallWeightsSumToArea) {
  for (double R : {0.5, 1.0, 2.0}) {
    const auto v = VelocitySet::ball(R);
    EXPECT_NEAR(v.weight_sum(), pi * R * R, 1e-12 * pi * R * R);
    for (const auto& n : v.nodes()) {
      EXPECT_GT(n.speed, 0.0);
      EXPECT_LE(n.speed, R);
      EXPECT_GT(n.weight, 0.0);
    }
  }
}

TEST(VelocitySet, SphereWeightsSumToLength) {
  const double R = 1.5;
  const auto v = VelocitySet::sphere(R, 40);
  EXPECT_NEAR(v.weight_sum(), 2.0 * pi * R, 1e-12 * 2.0 * pi * R);
  for (const auto& n : v.nodes()) EXPECT_EQ(n.speed, R);
}

TEST(VelocitySet, RejectsInvalidParameters) {
  EXPECT_THROW(VelocitySet::ball(0.0), InvalidArgument);
  EXPECT_THROW(VelocitySet::ball(1.0, 0), InvalidArgument);
  EXPECT_THROW(VelocitySet::sphere(-1.0), InvalidArgument);
  EXPECT_THROW(VelocitySet::ball(1.0, 4, 0), InvalidArgument);
  EXPECT_THROW(VelocitySet::ball(1.0, 4, 8, 1.0), InvalidArgument);
  EXPECT_THROW(velocity_kind_from_string("cube"), InvalidArgument);
}

TEST(Omega, ClosedForms) {
  EXPECT_DOUBLE_EQ(omega(VelocitySet::ball(1.0)), 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(omega(VelocitySet::ball(2.0)), 16.0 / 3.0);
  EXPECT_DOUBLE_EQ(omega(VelocitySet::sphere(1.0)), 2.0);
}

TEST(Omega, SphereMatchesCircleQuadrature) {
  const auto o = oracle::omega(VelocityKind::Sphere, 1.0, {1.0, 0.0});
  EXPECT_NEAR(o.value, 2.0, 1e-12);
}

TEST(Omega, RandomDirectionsMatchQuadratureOracle) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> U(-pi, pi);
  const auto v = VelocitySet::ball(1.0);
  double worst = 0.0;
  for (int n = 0; n < 1000; ++n) {
    const double a = U(rng);
    const auto o = oracle::omega(VelocityKind::Ball, 1.0, {std::cos(a), std::sin(a)});
    worst = std::max(worst, rel(o.value, omega(v)));
  }
  EXPECT_LT(worst, 1e-8);
}

TEST(DirectionalFirstMoment, ClosedForms) {
  const Vec2 e1{1.0, 0.0}, e2{0.0, 1.0};
  EXPECT_DOUBLE_EQ(directional_first_moment(VelocitySet::ball(1.0), e1, e1), pi / 8.0);
  EXPECT_DOUBLE_EQ(directional_first_moment(VelocitySet::ball(1.0), e1, e2), 0.0);
  EXPECT_DOUBLE_EQ(directional_first_moment(VelocitySet::sphere(1.0), e1, e1), pi / 2.0);
}

TEST(DirectionalFirstMoment, SymmetricAndHomogeneous) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> N;
  const auto v = VelocitySet::ball(1.3);
  for (int n = 0; n < 200; ++n) {
    const Vec2 p{N(rng), N(rng)}, q{N(rng), N(rng)};
    EXPECT_NEAR(directional_first_moment(v, p, q), directional_first_moment(v, q, p), 1e-12);
    const double lam = 3.7;
    EXPECT_NEAR(directional_first_moment(v, lam * p, q), lam * directional_first_moment(v, p, q),
                1e-12 * std::abs(lam * directional_first_moment(v, p, q)) + 1e-300);
  }
}

TEST(DirectionalFirstMoment, MatchesOracleOnRandomPairs) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> N;
  for (VelocityKind kind : {VelocityKind::Ball, VelocityKind::Sphere}) {
    const auto v = VelocitySet::make(kind, 2.0, 8, 32);
    for (int n = 0; n < 20; ++n) {
      const Vec2 p{N(rng), N(rng)}, q{N(rng), N(rng)};
      const double ref = oracle::directional_first_moment(kind, 2.0, p, q).value;
      EXPECT_NEAR(directional_first_moment(v, p, q), ref, 1e-8 * std::abs(ref) + 1e-12);
    }
  }
}

TEST(SecondMomentTensor, ClosedFormsAndIsotropy) {
  const Mat2 b = second_moment_tensor(VelocitySet::ball(1.0));
  EXPECT_DOUBLE_EQ(b.xx, pi / 4.0);
  EXPECT_DOUBLE_EQ(b.yy, pi / 4.0);
  EXPECT_EQ(b.xy, 0.0);
  EXPECT_EQ(b.yx, 0.0);
  const Mat2 s = second_moment_tensor(VelocitySet::sphere(1.0));
  EXPECT_DOUBLE_EQ(s.xx, pi);
  const Mat2 o = oracle::second_moment_tensor(VelocityKind::Sphere, 1.0);
  EXPECT_NEAR(o.xx, pi, 1e-10);
  EXPECT_NEAR(o.xy, 0.0, 1e-12);
}

TEST(SecondMomentTensor, NodeQuadratureIsExactForPolynomials) {
  // Gauss-Legendre in w and uniform angles integrate v (x) v exactly.
  const auto v = VelocitySet::ball(1.0, 8, 32);
  double xx = 0.0;
  for (int k = 0; k < v.n_speed(); ++k)
    for (int j = 0; j < v.n_angle(); ++j) xx += v.vector(k, j).x * v.vector(k, j).x * v.weight(k, j);
  EXPECT_NEAR(xx, pi / 4.0, 1e-13);
}

#include <cmath>

#include <gtest/gtest.h>

#include "kinchem/battery.hpp"
#include "kinchem/oracles.hpp"

using namespace kinchem;

namespace {

oracle::CartesianState gaussian_blob(const oracle::CartesianGrid& g, Vec2 c, double sigma) {
  oracle::CartesianState s(g);
  for (int a = 0; a < g.n(); ++a)
    for (int b = 0; b < g.n(); ++b) {
      const double dx = g.x(a) - c.x, dy = g.x(b) - c.y;
      const double rho = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
      for (int k = 0; k < g.nw(); ++k)
        for (int j = 0; j < g.nth(); ++j) s.at(a, b, k, j) = rho * (1.0 + 0.1 * j);
    }
  return s;
}

}  // namespace

TEST(Quadrature, VelocityIntegralOfConstantsAndMoments) {
  const auto one = [](double, double) { return 1.0; };
  EXPECT_NEAR(oracle::velocity_integral(VelocityKind::Ball, 2.0, one).value, 4.0 * pi, 1e-12);
  EXPECT_NEAR(oracle::velocity_integral(VelocityKind::Sphere, 2.0, one).value, 4.0 * pi, 1e-12);
  const auto w2 = [](double w, double) { return w * w; };
  EXPECT_NEAR(oracle::velocity_integral(VelocityKind::Ball, 1.0, w2).value, pi / 2.0, 1e-12);
}

TEST(Quadrature, OmegaGammaTwoWays) {
  for (double g : {0.1, 0.5, 0.8})
    EXPECT_NEAR(oracle::omega_gamma(g).value, oracle::omega_gamma_beta(g), 1e-9 * oracle::omega_gamma_beta(g));
}

TEST(Quadrature, KFunctionalOfUniformDisk) {
  const double M = 2.0, a = 1.0;
  const auto rho = [&](double r) { return r <= a ? M / (pi * a * a) : 0.0; };
  EXPECT_NEAR(oracle::K_functional(rho, 2.0, {a}).value, M * M * a / (5.0 * pi), 1e-10);
}

TEST(CartesianOracle, RejectsUnsupportedGrids) {
  EXPECT_THROW(oracle::CartesianGrid(64, 1.0, VelocitySet::ball(1.0, 4, 16, 0.0)), InvalidArgument);
  EXPECT_THROW(oracle::CartesianGrid(16, 1.0, VelocitySet::ball(1.0, 4, 16)), InvalidArgument);
  EXPECT_THROW(oracle::CartesianGrid(16, 1.0, VelocitySet::ball(1.0, 4, 32, 0.0)), InvalidArgument);
}

TEST(CartesianOracle, TransportConservesMassOfInteriorData) {
  const oracle::CartesianGrid g(24, 4.0, VelocitySet::ball(1.0, 4, 16, 0.0));
  // Upwind moves data one cell per step: after 3 steps the boundary sees
  // only the tail beyond |x| = L - 3h, where the blob is below e^-25.
  auto s = gaussian_blob(g, {0.0, 0.0}, 0.4);
  const double m0 = oracle::cartesian_mass(s);
  for (int n = 0; n < 3; ++n) oracle::cartesian_step(s, 0.0, oracle::cartesian_dt_max(g));
  EXPECT_NEAR(oracle::cartesian_mass(s), m0, 1e-10 * m0);
}

TEST(CartesianOracle, CommutesWithQuarterTurns) {
  const oracle::CartesianGrid g(16, 3.0, VelocitySet::ball(1.0, 4, 16, 0.0));
  auto s = gaussian_blob(g, {0.7, -0.4}, 0.6);
  for (double& x : s.f) x *= 20.0;
  auto rot = oracle::rotate_quarter(s);
  const double dt = 0.9 * oracle::cartesian_dt_max(g);
  for (int n = 0; n < 3; ++n) {
    oracle::cartesian_step(s, 1.0, dt);
    oracle::cartesian_step(rot, 1.0, dt);
  }
  const auto rs = oracle::rotate_quarter(s);
  double worst = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < rs.f.size(); ++i) {
    worst = std::max(worst, std::abs(rs.f[i] - rot.f[i]));
    scale = std::max(scale, std::abs(rs.f[i]));
  }
  EXPECT_LE(worst, 1e-12 * scale);
  // Four quarter turns are the identity.
  auto r4 = oracle::rotate_quarter(oracle::rotate_quarter(oracle::rotate_quarter(oracle::rotate_quarter(s))));
  EXPECT_EQ(r4.f, s.f);
}

TEST(CartesianOracle, AgreesWithRadialSolver) {
  const auto x = cartesian_cross_check();
  EXPECT_LE(x.l1_relative, 0.05);
  EXPECT_LE(x.rotation_defect, 1e-10);
  EXPECT_LE(x.cartesian_mass_change, 1e-3);
}

TEST(Dispersion, EqualExponentsAreInvariant) {
  const auto data = dispersion_data();
  const auto rep = oracle::dispersion_check(data[0].first, data[0].second, {{2.0, 2.0}}, {0.5, 2.0});
  for (const auto& s : rep.samples) EXPECT_NEAR(s.lhs, s.rhs, 1e-9 * s.rhs);
  EXPECT_TRUE(rep.passed);
}

TEST(Dispersion, DecayBoundOnDefaultData) {
  const auto data = dispersion_data();
  const auto rep = oracle::dispersion_check(data[1].first, data[1].second, {{4.0, 2.0}}, {1.0, 2.0, 4.0});
  EXPECT_TRUE(rep.passed);
  for (const auto& s : rep.samples) EXPECT_LE(s.lhs, 1.05 * s.rhs) << "t=" << s.t;
  EXPECT_DOUBLE_EQ(rep.expected_exponent, 2.0 * (1.0 / 2.0 - 1.0 / 4.0));
  EXPECT_GE(rep.decay_exponent, 0.95 * rep.expected_exponent);
  EXPECT_THROW(oracle::dispersion_check(data[0].first, data[0].second, {{1.5, 3.0}}, {1.0}), InvalidArgument);
}

TEST(Battery, CheapChecksPass) {
  for (const auto& c : {check_averaged_quantities(), check_virial_coupling(), check_K_functional(7), check_thresholds(),
                        check_gamma_star(), check_supersolution()})
    EXPECT_TRUE(c.passed) << c.name << ": " << c.detail;
}

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "kinchem/chemfield.hpp"
#include "kinchem/initial_data.hpp"
#include "kinchem/oracles.hpp"

using namespace kinchem;

namespace {

RadialDensity disk(int n, double r_max, double M, double a) { return uniform_disk_density(n, r_max / n, M, a); }

}  // namespace

TEST(RadialDensity, MassAndValidation) {
  const auto d = disk(400, 4.0, 3.0, 1.0);
  EXPECT_NEAR(d.mass(), 3.0, 1e-13);
  EXPECT_THROW(RadialDensity(0.0, {1.0}), InvalidArgument);
  RadialDensity bad(0.1, {1.0, -1.0});
  EXPECT_THROW(bad.validate(), InvalidArgument);
}

TEST(SolveRadialAlpha0, UniformDiskField) {
  // Cells resolve the disk edge exactly; inside, the half-cell rule gives
  // int_0^{r_i} l dl up to dr^2/8.
  const double M = 2.0, a = 1.0;
  const int n = 400;
  const auto d = disk(n, 4.0, M, a);
  const auto f = solve_radial_alpha0(d);
  const double lvl = M / (pi * a * a);
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double r = d.r[i];
    if (r < a) {
      EXPECT_NEAR(f.Sprime[i], -M * r / (2.0 * pi * a * a), lvl * d.dr * d.dr / (8.0 * r) * (1.0 + 1e-9));
    } else {
      EXPECT_NEAR(f.Sprime[i], -M / (2.0 * pi * r), 1e-13);
    }
    EXPECT_LE(f.Sprime[i], 0.0);
  }
}

TEST(SolveRadialAlpha0, ZeroDensityGivesZeroField) {
  const auto f = solve_radial_alpha0(RadialDensity::zeros(16, 0.1));
  for (double s : f.Sprime) EXPECT_EQ(s, 0.0);
}

TEST(SolveRadialAlpha0, RadialBoundAndMonotoneEnclosedMass) {
  const auto g = radial_gaussian_density(300, 0.02, 5.0, 0.8);
  const auto f = solve_radial_alpha0(g);
  double prev = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double rs = g.r[i] * std::abs(f.Sprime[i]);
    EXPECT_LE(rs, g.mass() / (2.0 * pi) * (1.0 + 1e-12));
    EXPECT_GE(rs, prev);
    prev = rs;
  }
}

TEST(BesselKernel, MatchesClosedFormAndPoissonLimit) {
  for (double alpha : {0.01, 0.5, 4.0})
    for (double z : {1e-3, 0.1, 1.0, 7.0}) {
      const double ref = oracle::bessel_gradient_closed(z, alpha);
      EXPECT_NEAR(bessel_gradient_kernel(z, alpha), ref, 1e-7 * ref);
    }
  EXPECT_NEAR(bessel_gradient_kernel(1.0, 1e-12), 1.0 / (2.0 * pi), 1e-6);
  EXPECT_NEAR(poisson_gradient_kernel(1.0), 0.15915494309189535, 1e-16);
  EXPECT_THROW(bessel_gradient_kernel(0.0, 1.0), InvalidArgument);
  EXPECT_THROW(bessel_gradient_kernel(1.0, 0.0), InvalidArgument);
}

TEST(BesselKernel, NarrowPeakAtLargeDistance) {
  const double ref = oracle::bessel_gradient_closed(100.0, 1.0);
  EXPECT_NEAR(bessel_gradient_kernel(100.0, 1.0), ref, 1e-7 * ref);
}

TEST(KernelConstant, IsHalfPi) {
  EXPECT_NEAR(kernel_constant(), pi / 2.0, 1e-10);
  EXPECT_NEAR(oracle::kernel_constant().value, pi / 2.0, 1e-8);
}

TEST(KernelConstant, BoundsKernelDifference) {
  for (double alpha : {0.01, 0.1, 1.0})
    for (int i = 0; i < 100; ++i) {
      const double z = std::pow(10.0, -3.0 + 0.05 * i);
      const double diff = std::abs(bessel_gradient_kernel(z, alpha) - poisson_gradient_kernel(z));
      EXPECT_LE(diff, std::sqrt(alpha) * pi / 2.0 * (1.0 + 1e-6)) << "alpha=" << alpha << " z=" << z;
    }
}

TEST(SolveRadialAlphaPos, ContractAndZeroDensity) {
  const auto z = RadialDensity::zeros(32, 0.1);
  EXPECT_THROW(solve_radial_alpha_pos(z, 0.0), InvalidArgument);
  const auto f = solve_radial_alpha_pos(z, 0.3);
  for (double s : f.Sprime) EXPECT_EQ(s, 0.0);
}

TEST(SolveRadialAlphaPos, DeviationFromAlpha0WithinKernelBound) {
  const double M = 3.0;
  const auto d = disk(400, 6.0, M, 1.0);
  const auto f0 = solve_radial_alpha0(d);
  const auto fa = solve_radial_alpha_pos(d, 0.01);
  double worst = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) worst = std::max(worst, std::abs(fa.Sprime[i] - f0.Sprime[i]));
  EXPECT_LE(worst, 0.1 * (pi / 2.0) * M * (1.0 + 1e-3));
  for (double s : fa.Sprime) EXPECT_LE(s, 0.0);
}

TEST(SolveRadialAlphaPos, MatchesAngularQuadratureOracle) {
  const double sig = 0.6, alpha = 0.5;
  const auto g = radial_gaussian_density(1200, 6.0 / 1200, 1.0, sig);
  auto rho = [&](double r) { return 1.0 / (2.0 * pi * sig * sig) * std::exp(-r * r / (2.0 * sig * sig)); };
  const auto f = solve_radial_alpha_pos(g, alpha);
  for (std::size_t i : {60u, 150u, 300u, 600u}) {
    const double ref = oracle::alpha_gradient(rho, alpha, g.r[i], 6.0);
    EXPECT_NEAR(f.Sprime[i], ref, 1e-4 * std::abs(ref)) << "r=" << g.r[i];
  }
}

TEST(VirialCoupling, EqualsMinusMassSquaredOver4Pi) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (double M : {1.0, 2.0 * pi, 10.0}) {
    for (int trial = 0; trial < 5; ++trial) {
      std::vector<double> v(150);
      for (auto& x : v) x = U(rng);
      RadialDensity d(0.03, v);
      const double s = M / d.mass();
      for (auto& x : d.rho) x *= s;
      EXPECT_NEAR(virial_coupling(d), -M * M / (4.0 * pi), 1e-12 * M * M);
    }
  }
  EXPECT_EQ(virial_coupling(RadialDensity::zeros(10, 0.1)), 0.0);
  EXPECT_NEAR(virial_coupling(disk(100, 2.0, 2.0 * pi, 1.0)), -pi, 1e-12);
}

TEST(EllipticBound, UniformDiskAndGaussian) {
  const auto d = disk(400, 4.0, 1.0, 1.0);
  const auto rep = elliptic_bound_check(d, 3.0);
  EXPECT_TRUE(rep.radial_bound_holds);
  EXPECT_NEAR(rep.sup_r_gradient, 1.0 / (2.0 * pi), 1e-12);
  EXPECT_GT(rep.interpolation, 0.0);
  const auto z = elliptic_bound_check(RadialDensity::zeros(8, 0.1), 4.0);
  EXPECT_EQ(z.sup_gradient, 0.0);
  EXPECT_EQ(z.interpolation, 0.0);
  EXPECT_TRUE(elliptic_bound_check(radial_gaussian_density(200, 0.05, 2.0, 1.0), 3.0).radial_bound_holds);
  EXPECT_THROW(elliptic_bound_check(d, 2.0), InvalidArgument);
}

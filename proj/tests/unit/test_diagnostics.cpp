#include <cmath>
#include <limits>
#include <memory>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "kinchem/diagnostics.hpp"
#include "kinchem/initial_data.hpp"

using namespace kinchem;

namespace {

std::shared_ptr<const PhaseGrid> grid(int nr = 64, double r_max = 4.0, int nw = 4, int np = 32) {
  return std::make_shared<const PhaseGrid>(nr, r_max, VelocitySet::ball(1.0, nw, np));
}

RadialDensity random_density(unsigned seed, int n = 120, double dr = 0.05) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = U(rng) * U(rng);
  return {dr, v};
}

DiagnosticsRecord rec(double t, double M, double I, double dIdt, double K, std::vector<double> norms = {}) {
  DiagnosticsRecord r;
  r.t = t;
  r.M = M;
  r.I = I;
  r.dIdt = dIdt;
  r.K = K;
  r.norms = std::move(norms);
  return r;
}

}  // namespace

TEST(SecondMoment, UniformDisk) {
  const double M = 3.0, a = 1.5;
  const auto d = uniform_disk_density(600, 3.0 / 600, M, a);
  EXPECT_NEAR(second_moment(d), M * a * a / 4.0, 1e-5 * M * a * a);
  EXPECT_EQ(second_moment(RadialDensity::zeros(8, 0.1)), 0.0);
}

TEST(KFunctional, UniformDiskClosedForm) {
  for (double a : {0.5, 1.0, 2.0}) {
    const double M = 5.0;
    const auto d = uniform_disk_density(800, 3.0 * a / 800, M, a);
    EXPECT_NEAR(K_functional(d, d.mass()), M * M * a / (5.0 * pi), 1e-5 * M * M * a);
  }
}

TEST(KFunctional, HalfFormAgreesAndBoundHolds) {
  for (unsigned seed = 0; seed < 20; ++seed) {
    const auto d = random_density(seed);
    const double M = d.mass();
    const double K = K_functional(d, M);
    EXPECT_NEAR(K_functional_half_form(d, M), K, 1e-12 * K);
    EXPECT_GE(K, 0.0);
    EXPECT_LE(K, K_bound(M, second_moment(d)) * (1.0 + 1e-12));
  }
}

TEST(Admissibility, Exponents) {
  EXPECT_TRUE(admissible_exponents(3.0, 1.5));
  EXPECT_TRUE(admissible_exponents(4.0, 2.0));
  EXPECT_TRUE(admissible_exponents(3.0, 3.0));
  std::string why;
  EXPECT_FALSE(admissible_exponents(2.0, 1.5, &why));
  EXPECT_EQ(why, "need p > 2");
  EXPECT_FALSE(admissible_exponents(3.0, 1.0));
  EXPECT_FALSE(admissible_exponents(3.0, 4.0));
  EXPECT_FALSE(admissible_exponents(10.0, 1.2));  // 1/q - 1/p >= 1/2
}

TEST(LplqNorm, ZeroHomogeneousAndPEqualsQ) {
  const auto G = grid();
  PhaseState z(G);
  EXPECT_EQ(lplq_norm(z, 3.0, 1.5), 0.0);
  InitialSpec spec;
  auto s = state_from_density(G, radial_gaussian_density(G->nr(), G->dr(), 2.0, 0.6), velocity_profile(*G, spec));
  const double n1 = lplq_norm(s, 4.0, 2.0);
  auto s2 = s;
  for (double& x : s2.g) x *= 2.5;
  EXPECT_NEAR(lplq_norm(s2, 4.0, 2.0), 2.5 * n1, 1e-13 * n1);
  // p = q: plain L^3 norm over phase space.
  double acc = 0.0;
  for (int i = 0; i < G->nr(); ++i)
    for (int k = 0; k < G->nw(); ++k)
      for (int j = 0; j < G->nphi(); ++j) acc += std::pow(s.at(i, k, j), 3.0) * G->weight(k) * G->cell_area(i);
  EXPECT_NEAR(lplq_norm(s, 3.0, 3.0), std::cbrt(acc), 1e-13 * std::cbrt(acc));
  EXPECT_THROW(lplq_norm(s, 2.0, 1.5), InvalidArgument);
}

TEST(CurrentMoment, MatchesFiniteDifferenceOfSecondMoment) {
  const auto G = grid(256, 4.0, 4, 64);
  InitialSpec spec;
  spec.profile = VelocityProfile::Beam;
  spec.beam_angle = 0.7;
  spec.beam_width = 1.0;
  auto s = state_from_density(G, radial_gaussian_density(G->nr(), G->dr(), 1.0, 0.5), velocity_profile(*G, spec));
  const double d0 = current_moment(s);
  const double I0 = second_moment(s);
  // Second-order transport: upwind diffusion would add O(w dr M) to dI/dt.
  const double h = transport_dt_max(*G, Reconstruction::Muscl);
  reduced_transport_step(s, h, Reconstruction::Muscl);
  const double fd = (second_moment(s) - I0) / h;
  EXPECT_GT(d0, 0.0);
  EXPECT_NEAR(fd, d0, 0.02 * d0);
}

TEST(MakeRecord, FieldsAndNormCount) {
  const auto G = grid();
  InitialSpec spec;
  auto s = state_from_density(G, uniform_disk_density(G->nr(), G->dr(), 2.0, 1.0), velocity_profile(*G, spec));
  s.t = 0.25;
  const auto r = make_record(s, default_norms());
  EXPECT_EQ(r.t, 0.25);
  EXPECT_NEAR(r.M, 2.0, 1e-13);
  EXPECT_NEAR(r.dIdt, 0.0, 1e-14);
  EXPECT_EQ(r.norms.size(), 2u);
  EXPECT_TRUE(std::isnan(r.excess));
  const auto mu = mu0_of(s, r.K, 1.0, 1.0);
  EXPECT_TRUE(mu.within_bound);
  EXPECT_NEAR(mu.value, (2.0 / 3.0) * r.K, 1e-14);
}

TEST(ProjectedZeroTime, Examples) {
  EXPECT_DOUBLE_EQ(projected_zero_time(1.0, 0.0, 2.0), 1.0);
  EXPECT_DOUBLE_EQ(projected_zero_time(1.0, 1.0, 1.0), 1.0 + std::sqrt(3.0));
  EXPECT_DOUBLE_EQ(projected_zero_time(1.0, -2.0, 0.0), 0.5);
  EXPECT_TRUE(std::isinf(projected_zero_time(1.0, 0.0, 0.0)));
  EXPECT_TRUE(std::isinf(projected_zero_time(1.0, 1.0, -1.0)));
  EXPECT_DOUBLE_EQ(projected_zero_time(1.0, -2.0, -1.0), 2.0 - std::sqrt(2.0));
}

TEST(VirialTracker, HoldsAndDetectsViolation) {
  const VirialParams vp{ThresholdModel::BallKinetic, 1.0, 1.0, 0.0};
  const double M = 64.0, d = delta(vp.model, M, 1.0, 1.0), om = omega_of(vp.model, 1.0);
  ASSERT_GT(d, 0.0);
  std::vector<DiagnosticsRecord> s;
  for (int n = 0; n <= 10; ++n) {
    const double t = 0.1 * n;
    s.push_back(rec(t, M, 10.0, 1.0 - d * t, 2.0));
  }
  auto rep = virial_tracker(s, vp);
  EXPECT_TRUE(rep.holds);
  EXPECT_NEAR(rep.delta, d, 0.0);
  EXPECT_NEAR(rep.mu0, 1.0 + om * 2.0, 1e-15);
  EXPECT_TRUE(rep.forced_vanishing);
  EXPECT_DOUBLE_EQ(rep.projected_vanishing_time, projected_zero_time(10.0, rep.mu0, d));
  s[6].dIdt = 1.0 + om * 2.0 + 1.0;
  rep = virial_tracker(s, vp);
  EXPECT_FALSE(rep.holds);
  EXPECT_DOUBLE_EQ(rep.first_violation_time, s[6].t);
  EXPECT_GT(rep.max_excess, 0.0);
  EXPECT_EQ(virial_tracker({}, vp).message, "empty series");
}

TEST(BlowupDetector, NormGrowthTriggersAtThreshold) {
  DetectorParams dp;
  dp.growth_factor = 1e3;
  dp.t_end = 1.0;
  std::vector<DiagnosticsRecord> s{rec(0.0, 1.0, 1.0, 0.0, 0.0, {1.0, 2.0}), rec(0.5, 1.0, 1.0, 0.0, 0.0, {999.0, 2.0})};
  auto v = blowup_detector(s, dp);
  EXPECT_EQ(v.verdict, Verdict::GlobalLooking);
  EXPECT_DOUBLE_EQ(v.max_norm_ratio[0], 999.0);
  s.push_back(rec(1.0, 1.0, 1.0, 0.0, 0.0, {1000.0, 2.0}));
  v = blowup_detector(s, dp);
  EXPECT_EQ(v.verdict, Verdict::BlowupSuspected);
  EXPECT_DOUBLE_EQ(v.time, 1.0);
  EXPECT_EQ(blowup_detector({}, dp).reason, "no samples");
}

TEST(BlowupDetector, VirialProjectionFiresOnlyWithinHorizon) {
  DetectorParams dp;
  dp.virial = true;
  dp.vp = {ThresholdModel::BallKinetic, 1.0, 1.0, 0.0};
  const double M = 64.0, d = delta(dp.vp.model, M, 1.0, 1.0);
  const std::vector<DiagnosticsRecord> s{rec(0.0, M, 1.0, 0.0, 0.0, {1.0})};
  const double tz = projected_zero_time(1.0, 0.0, d);
  dp.t_end = 0.9 * tz;
  EXPECT_EQ(blowup_detector(s, dp).verdict, Verdict::GlobalLooking);
  dp.t_end = tz;
  const auto v = blowup_detector(s, dp);
  EXPECT_EQ(v.verdict, Verdict::BlowupSuspected);
  EXPECT_DOUBLE_EQ(v.projected_vanishing_time, tz);
  dp.virial = false;
  EXPECT_EQ(blowup_detector(s, dp).verdict, Verdict::GlobalLooking);
}

TEST(Csv, HeaderAndRowFormat) {
  std::ostringstream os;
  write_csv_header(os, default_norms());
  EXPECT_EQ(os.str(), "t,M,I,dIdt,K,norm_p3q1.5,norm_p4q2,excess\n");
  std::ostringstream row;
  write_csv_row(row, rec(0.1, 1.0, 0.5, -0.25, 2.0, {3.0}));
  EXPECT_EQ(row.str(), "0.10000000000000001,1,0.5,-0.25,2,3,nan\n");
  EXPECT_EQ(format_double(std::numeric_limits<double>::infinity()), "inf");
}

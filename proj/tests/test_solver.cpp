#include <algorithm>
#include <cmath>
#include <random>
#include <utility>

#include <gtest/gtest.h>

#include "nwl/nwl.hpp"
#include "support/fixtures.hpp"

using namespace nwl;
using nwl_test::closest;
using nwl_test::whitham_branch_256;

namespace {

// Residual -c phi + L phi + phi^2 - B with an arbitrary B.
double general_residual_at(const WaveProfile& p, int j) {
  const auto Lp = apply_L_unchecked(p.symbol, p.phi);
  const auto sq = multiply_dealiased(p.phi, p.phi);
  return -p.c * p.phi[j] + Lp[j] + sq[j] - p.b;
}

}  // namespace

TEST(Residual, TrivialAndConstantSolutions) {
  const PeriodicGrid g(32);
  const auto s = whitham();
  EXPECT_EQ(residual_norm(WaveProfile(SpectralField::constant(g, 0.0), 0.9, 0.0, s)), 0.0);
  const double c = 0.9;
  for (double gamma : {0.0, c - 1.0}) EXPECT_LT(residual_norm(WaveProfile(SpectralField::constant(g, gamma), c, 0.0, s)), 1e-15);
  const double gamma = 0.05;
  const auto r = residual(WaveProfile(SpectralField::constant(g, gamma), c, 0.0, s));
  EXPECT_NEAR(r[3], -c * gamma + gamma + gamma * gamma, 1e-15);
}

TEST(Galilean, ResidualInvariance) {
  const auto& br = whitham_branch_256();
  for (const auto* p : {&br.profiles[3], &closest(br, 0.5), &br.profiles.back()}) {
    for (double gamma : {0.1, -0.1, 0.5, -0.5}) {
      const auto q = galilean_shift(*p, gamma);
      double d = 0.0;
      for (int j = 0; j < p->phi.size(); ++j) d = std::max(d, std::abs(general_residual_at(q, j) - general_residual_at(*p, j)));
      EXPECT_LE(d, 1e-12) << gamma;
      EXPECT_EQ(q.phi.argmax(), p->phi.argmax());
      EXPECT_EQ(q.phi.argmin(), p->phi.argmin());
      EXPECT_LT(max_abs_difference(q.phi + (-q.phi.mean()), p->phi + (-p->phi.mean())), 1e-12);
    }
  }
}

TEST(Galilean, GroupProperties) {
  const auto& p = closest(whitham_branch_256(), 0.5);
  const auto id = galilean_shift(p, 0.0);
  EXPECT_EQ(id.phi.values(), p.phi.values());
  EXPECT_EQ(id.c, p.c);
  const auto back = galilean_shift(galilean_shift(p, 0.3), -0.3);
  EXPECT_LT(max_abs_difference(back.phi, p.phi), 1e-13);
  EXPECT_NEAR(back.c, p.c, 1e-13);
  EXPECT_NEAR(back.b, p.b, 1e-13);
  const auto hom = WaveProfile(SpectralField::constant(PeriodicGrid(16), 0.0), 1.0, 0.0, fkdv(-1.0));
  EXPECT_THROW(galilean_shift(hom, 0.1), DomainError);
}

TEST(FixedPoint, ConstantStatesMatchScalarMap) {
  const PeriodicGrid g(64);
  const auto s = whitham();
  // Starts inside the basin of the attracting constant: 0 for c > 1, c - 1 for c < 1.
  for (auto [c, start] : {std::pair{1.2, 0.01}, std::pair{1.2, -0.05}, std::pair{0.9, -0.05}, std::pair{0.9, -0.2}}) {
    // Scalar oracle gamma <- c/2 - sqrt(c^2/4 - m(0) gamma).
    double gamma = start;
    for (int it = 0; it < 100000; ++it) gamma = 0.5 * c - std::sqrt(0.25 * c * c - gamma);
    const auto p = fixed_point_solve(s, c, SpectralField::constant(g, start));
    EXPECT_NEAR(p.phi.mean(), gamma, 1e-10) << c << " " << start;
    EXPECT_TRUE(std::abs(gamma) < 1e-9 || std::abs(gamma - (c - 1.0)) < 1e-9);
    EXPECT_LE(p.residual_norm, 1e-10);
  }
  // Below c = 1 the rest state repels and the iterate climbs to the guard.
  EXPECT_THROW(fixed_point_solve(s, 0.9, SpectralField::constant(g, 0.01)), HighestWaveApproach);
}

TEST(FixedPoint, SmallWaveAboveSpeedOneDecaysToRest) {
  const PeriodicGrid g(128);
  const double c = 1.05;
  const auto init = SpectralField::from_function(g, [&](double x) { return 0.01 * 0.5 * c * std::cos(x); });
  const auto p = fixed_point_solve(whitham(), c, init);
  EXPECT_LT(p.phi.max_abs(), 1e-10);
  EXPECT_LT(p.phi.max(), 0.5 * c);
}

TEST(FixedPoint, NoSmallWaveAtSpeedNearBifurcation) {
  // With B = 0 the only nearby states at c = 1.05 m(1) are constants and the
  // mean mode of the map is expanding, so the iterate climbs to the guard.
  const PeriodicGrid g(128);
  const auto s = whitham();
  const double c = 1.05 * s(1);
  const auto init = SpectralField::from_function(g, [&](double x) { return 0.01 * 0.5 * c * std::cos(x); });
  EXPECT_THROW(fixed_point_solve(s, c, init), HighestWaveApproach);
}

TEST(FixedPoint, RadicandGuardReportsPoint) {
  const PeriodicGrid g(64);
  const auto init = SpectralField::from_function(g, [](double x) { return std::cos(x); });
  try {
    fixed_point_solve(whitham(), 0.5, init);
    FAIL() << "expected HighestWaveApproach";
  } catch (const HighestWaveApproach& e) {
    EXPECT_LE(e.radicand(), 1e-12 * 0.25);
    EXPECT_GE(e.x(), -kPi);
  }
  EXPECT_THROW(fixed_point_solve(whitham(), -1.0, init), DomainError);
}

TEST(FixedPoint, HomogeneousKeepsMeanAndBh) {
  const PeriodicGrid g(128);
  const auto init = SpectralField::from_function(g, [](double x) { return 0.005 * std::cos(x); });
  const auto p = fixed_point_solve(fkdv(-1.0), 1.05, init);
  EXPECT_LE(std::abs(p.phi.mean()), 1e-12);
  EXPECT_NEAR(p.b, multiply_dealiased(p.phi, p.phi).mean(), 1e-12);
}

TEST(FixedPoint, IterationCap) {
  const PeriodicGrid g(32);
  FixedPointOptions o;
  o.max_iter = 3;
  try {
    fixed_point_solve(whitham(), 0.9, SpectralField::constant(g, -0.05), o);
    FAIL() << "expected FixedPointFailure";
  } catch (const FixedPointFailure& e) {
    EXPECT_EQ(e.iterations(), 3);
    EXPECT_EQ(e.last_iterate.size(), 32u);
  }
}

TEST(Newton, RefinesFixedPointOutput) {
  const PeriodicGrid g(64);
  FixedPointOptions fo;
  fo.tol = 1e-6;
  const auto fp = fixed_point_solve(whitham(), 0.9, SpectralField::constant(g, -0.05), fo);
  const auto p = newton_solve(fp, Constraint::fix_speed());
  EXPECT_LE(p.residual_norm, 1e-12);
  EXPECT_LE(p.iterations, 5);
}

TEST(Newton, FixHeightAtCurrentHeightIsIdentity) {
  const auto& p = closest(whitham_branch_256(), 0.5);
  const auto q = newton_solve(p, Constraint::fix_height(p.height()));
  EXPECT_NEAR(q.c, p.c, 1e-12);
  EXPECT_LT(max_abs_difference(q.phi, p.phi), 1e-12);
}

TEST(Newton, RecoversFromNoise) {
  const auto& p = closest(whitham_branch_256(), 0.5);
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> ud(-1e-4, 1e-4);
  std::vector<double> v = p.phi.values();
  for (auto& x : v) x += ud(rng);
  // Keep the noise even so the crest stays at the origin.
  const int n = p.phi.size();
  for (int j = 1; j < n / 2; ++j) v[static_cast<std::size_t>(n / 2 - j)] = v[static_cast<std::size_t>(n / 2 + j)];
  const auto q = newton_solve(WaveProfile(SpectralField(p.phi.grid(), v), p.c, 0.0, p.symbol), Constraint::fix_height(p.height()));
  EXPECT_LT(max_abs_difference(q.phi, p.phi), 1e-12);
  EXPECT_NEAR(q.c, p.c, 1e-12);
}

TEST(Newton, FoldAtBifurcation) {
  // The constant gamma at c = m(1) + 2 gamma has a Jacobian that vanishes on cos x and sin x.
  const auto s = whitham();
  const double gamma = 0.05;
  const WaveProfile flat(SpectralField::constant(PeriodicGrid(32), gamma), s(1) + 2.0 * gamma, 0.0, s);
  ASSERT_GT(residual_norm(flat), 1e-3);
  EXPECT_THROW(newton_solve(flat, Constraint::fix_speed()), FoldDetected);
}

TEST(SmallAmplitude, SpeedsAndResidualScaling) {
  const PeriodicGrid g(64);
  EXPECT_NEAR(small_amplitude_init(whitham(), 0.01, g).c0, 0.8726936, 5e-8);
  EXPECT_EQ(small_amplitude_init(fkdv(-1.0), 0.01, g).c0, 1.0);
  EXPECT_THROW(small_amplitude_init(whitham(), 0.5, g), DomainError);
  EXPECT_THROW(small_amplitude_init(whitham(), 0.0, g), DomainError);
  const auto s = whitham();
  auto res = [&](double eps) {
    const auto sa = small_amplitude_init(s, eps, g);
    return residual_norm(WaveProfile(sa.init, sa.c0, 0.0, s));
  };
  EXPECT_NEAR(res(0.01) / res(0.005), 4.0, 0.05);
}

TEST(Branch, WhithamToNinetyPercent) {
  const auto& br = whitham_branch_256();
  EXPECT_EQ(br.terminated_reason, Termination::TargetHeight);
  ASSERT_GE(br.profiles.size(), 20u);
  EXPECT_GE(br.profiles.back().height_ratio(), 0.9);
  EXPECT_LT(br.profiles.back().height_ratio(), 0.91);
  std::vector<double> dc;
  for (std::size_t i = 0; i < br.profiles.size(); ++i) {
    const auto& p = br.profiles[i];
    EXPECT_LE(residual_norm(p), 1e-10);
    EXPECT_LT(p.phi.max(), 0.5 * p.c);
    EXPECT_EQ(p.b, 0.0);
    EXPECT_LE(symmetry_defect(p.phi).defect, 1e-10);
    if (i > 0) {
      EXPECT_GT(br.heights[i], br.heights[i - 1]);
      dc.push_back(std::abs(br.speeds[i] - br.speeds[i - 1]) / (br.heights[i] - br.heights[i - 1]));
    }
  }
  // No jump in dc/dh beyond ten times the running median.
  for (std::size_t i = 3; i < dc.size(); ++i) {
    std::vector<double> head(dc.begin(), dc.begin() + static_cast<long>(i));
    std::nth_element(head.begin(), head.begin() + static_cast<long>(head.size() / 2), head.end());
    EXPECT_LE(dc[i], 10.0 * head[head.size() / 2]);
  }
}

TEST(Branch, NearLinearWaves) {
  BranchOptions o;
  o.theta = 0.05;
  o.eps = 0.002;
  o.min_steps = 10;
  const auto s = whitham();
  const auto br = continue_branch(s, PeriodicGrid(64), o);
  EXPECT_EQ(br.terminated_reason, Termination::TargetHeight);
  // c - m(1) = O(h^2) for the symmetric bifurcation; check it is small on the scale of h.
  for (std::size_t i = 0; i < br.profiles.size(); ++i) EXPECT_LE(std::abs(br.speeds[i] - s(1)), 2.0 * br.heights[i]);
}

TEST(Branch, HomogeneousMeanAndBh) {
  BranchOptions o;
  o.theta = 0.6;
  const auto br = continue_branch(fkdv(-1.0), PeriodicGrid(128), o);
  EXPECT_EQ(br.terminated_reason, Termination::TargetHeight);
  for (const auto& p : br.profiles) {
    EXPECT_LE(std::abs(p.phi.mean()), 1e-12);
    EXPECT_NEAR(p.b, multiply_dealiased(p.phi, p.phi).mean(), 1e-12);
    EXPECT_LE(p.residual_norm, 1e-10);
  }
}

TEST(Branch, ThetaValidated) {
  BranchOptions o;
  o.theta = 1.0;
  EXPECT_THROW(continue_branch(whitham(), PeriodicGrid(32), o), DomainError);
}

TEST(TwoRoute, QuadratureResidualAgrees) {
  const auto& br = whitham_branch_256();
  const auto qk = make_quadrature_kernel(whitham(), 256, 1000000);
  for (std::size_t i = 0; i < br.profiles.size(); i += 5) {
    const auto tr = residual_two_route(br.profiles[i], qk);
    EXPECT_LE(tr.residual_multiplier, 1e-10);
    EXPECT_LE(tr.route_difference, 1e-6);
  }
}

TEST(Holder, SyntheticCusp) {
  const PeriodicGrid g(1024);
  const double c = 1.0;
  const auto phi = SpectralField::from_function(g, [&](double x) { return 0.5 * c - std::sqrt(std::abs(x)); });
  const auto fit = holder_exponent_at_crest(WaveProfile(phi, c, 0.0, whitham()), HolderReference::HalfSpeed);
  EXPECT_NEAR(fit.alpha, 0.5, 0.05);
}

TEST(Holder, MidBranchWaveIsQuadratic) {
  const auto p = nwl_test::whitham_mid(1024);
  const auto fit = holder_exponent_at_crest(p, HolderReference::CrestValue);
  EXPECT_NEAR(fit.alpha, 2.0, 0.3);
  EXPECT_THROW(holder_exponent_at_crest(p, HolderReference::HalfSpeed), DomainError);
}

TEST(Holder, CoarseGridIsCapabilityError) {
  const PeriodicGrid g(16);
  const auto phi = SpectralField::from_function(g, [](double x) { return 0.5 - std::sqrt(std::abs(x)); });
  EXPECT_THROW(holder_exponent_at_crest(WaveProfile(phi, 1.0, 0.0, whitham())), CapabilityError);
}

TEST(SolverIo, BranchCsv) {
  const auto csv = branch_csv(whitham_branch_256());
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "step,height,c,residual");
  EXPECT_EQ(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')), whitham_branch_256().profiles.size() + 1);
}

#include <cmath>

#include <gtest/gtest.h>

#include "nwl/nwl.hpp"
#include "support/fixtures.hpp"

using namespace nwl;
using nwl_test::closest;
using nwl_test::whitham_branch_256;

TEST(Rhs, SteadyProfileIsPureTranslation) {
  // For a steady wave phi^2 + L phi = c phi + B, so the right side is -c phi'.
  const auto& p = closest(whitham_branch_256(), 0.5);
  const auto r = rhs(p.phi, p.symbol);
  const auto d = derivative(p.phi);
  double e = 0.0;
  for (int j = 0; j < p.phi.size(); ++j) e = std::max(e, std::abs(r[j] + p.c * d[j]));
  EXPECT_LE(e, 1e-9);
}

TEST(Rhs, Examples) {
  const PeriodicGrid g(32);
  EXPECT_EQ(rhs(SpectralField::constant(g, 0.0), whitham()).max_abs(), 0.0);
  EXPECT_LT(rhs(SpectralField::constant(g, 0.4), whitham()).max_abs(), 1e-15);
  // Linear part on cos x: -(m(1) cos x)' = m(1) sin x.
  const auto r = rhs(SpectralField::from_function(g, [](double x) { return std::cos(x); }), whitham(), false);
  for (int j = 0; j < 32; ++j) EXPECT_NEAR(r[j], whitham()(1) * std::sin(g.x(j)), 1e-14);
  EXPECT_THROW(rhs(SpectralField::constant(g, 0.4), fkdv(-1.0)), DomainError);
}

TEST(Integrate, ZeroStaysZero) {
  EvolutionOptions o;
  o.t_end = 2.0;
  o.dt = 0.01;
  const auto run = integrate(SpectralField::constant(PeriodicGrid(32), 0.0), whitham(), o);
  EXPECT_EQ(run.final_state.max_abs(), 0.0);
}

TEST(Integrate, LinearSingleMode) {
  const PeriodicGrid g(64);
  const auto s = whitham();
  EvolutionOptions o;
  o.t_end = 1.0;
  o.nonlinear = false;
  o.dt = 0.005;
  const auto run = integrate(SpectralField::from_function(g, [](double x) { return std::cos(x); }), s, o);
  const auto exact = SpectralField::from_function(g, [&](double x) { return std::cos(x - s(1)); });
  EXPECT_LE(max_abs_difference(run.final_state, exact), 1e-8);
}

TEST(Integrate, FourthOrderInTime) {
  const auto u0 = SpectralField::from_function(PeriodicGrid(64), [](double x) { return 0.1 * std::cos(x) + 0.05 * std::sin(2.0 * x); });
  EXPECT_NEAR(self_convergence_order(u0, whitham(), 0.05, 1.0), 4.0, 0.3);
}

TEST(Integrate, MeanConserved) {
  const auto u0 = SpectralField::from_function(PeriodicGrid(64), [](double x) { return 0.2 + 0.1 * std::cos(x) + 0.05 * std::sin(3.0 * x); });
  EvolutionOptions o;
  o.t_end = 3.0;
  o.snapshot_stride = 50;
  const auto run = integrate(u0, whitham(), o);
  for (double m : run.mean) EXPECT_NEAR(m, 0.2, 1e-13);
  EXPECT_GE(run.snapshots.size(), 3u);
  EXPECT_DOUBLE_EQ(run.snapshots.back().first, 3.0);
}

TEST(Integrate, BlowUpRaises) {
  const auto u0 = SpectralField::from_function(PeriodicGrid(64), [](double x) { return std::cos(x); });
  EvolutionOptions o;
  o.t_end = 50.0;
  o.dt = 0.5;
  try {
    integrate(u0, whitham(), o);
    FAIL() << "expected InstabilityError";
  } catch (const InstabilityError& e) {
    EXPECT_GT(e.time(), 0.0);
  }
}

TEST(Traveling, SteadyWaveTranslates) {
  const auto p = nwl_test::whitham_mid(512);
  const auto rep = traveling_check(p, 1);
  EXPECT_LE(rep.drift, 1e-5);
  EXPECT_LE(rep.mean_drift, 1e-12);
  EXPECT_NEAR(rep.period, 2.0 * kPi / p.c, 1e-12);
}

TEST(Traveling, EvenInMovingFrame) {
  const auto& p = closest(whitham_branch_256(), 0.5);
  EvolutionOptions o;
  o.t_end = 2.0;
  const auto run = integrate(p.phi, p.symbol, o);
  const auto back = translate(run.final_state, -p.c * o.t_end);
  EXPECT_LE(max_abs_difference(back, reflect(back, 0.0)), 1e-6);
}

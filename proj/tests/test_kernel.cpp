#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "nwl/kernel.hpp"
#include "support/fixtures.hpp"

using namespace nwl;

namespace {

double fkdv2_closed(double x) {  // on (0, 2pi)
  if (x < 0) x += 2 * kPi;
  return x * x / 2 - kPi * x + kPi * kPi / 3;
}

std::vector<Symbol> cm_builtins() {
  return {fkdv(-0.5), fkdv(-1.0), fkdv(-2.0), whitham(), bessel(-0.5), bessel(-1.0)};
}

MeasureAtoms random_atoms(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> ut(0.05, 0.95), uw(0.1, 2.0);
  std::uniform_int_distribution<int> na(1, 5);
  std::vector<Atom> atoms;
  const int count = na(rng);
  while (static_cast<int>(atoms.size()) < count) {
    const double t = ut(rng);
    bool dup = false;
    for (const auto& a : atoms) dup = dup || a.t == t;
    if (!dup) atoms.push_back({t, uw(rng)});
  }
  return MeasureAtoms(atoms);
}

}  // namespace

TEST(KernelClosedForm, ReducedOstrovsky) {
  const PeriodicGrid g(1024);
  KernelOptions o;
  o.M = 100000;
  const auto kt = build_kernel(fkdv(-2.0), g, o);
  EXPECT_EQ(kt.summation, Summation::Direct);
  EXPECT_FALSE(kt.includes_zero_mode);
  double worst = 0.0;
  for (int j = 0; j < g.n(); ++j)
    if (j != g.origin_index()) worst = std::max(worst, std::abs(kt.values[static_cast<std::size_t>(j)] - fkdv2_closed(g.x(j))));
  EXPECT_LT(worst, 1e-6);
  EXPECT_NEAR(kt.at_offset(g.n() / 2), -kPi * kPi / 6, 1e-6);
  EXPECT_GT(kt.tail_bound, 0.0);
  EXPECT_LT(kt.tail_bound, 1e-4);
}

TEST(KernelClosedForm, BurgersHilbert) {
  const PeriodicGrid g(1024);
  const auto kt = build_kernel(fkdv(-1.0), g);
  EXPECT_EQ(kt.summation, Summation::AbelRichardson);
  double worst = 0.0;
  for (int j = 0; j < g.n(); ++j) {
    const double x = std::abs(g.x(j));
    if (x >= 0.05) worst = std::max(worst, std::abs(kt.values[static_cast<std::size_t>(j)] + 2 * std::log(2 * std::sin(x / 2))));
  }
  EXPECT_LT(worst, 1e-6);
  EXPECT_NEAR(kt.at_offset(g.n() / 4), -std::log(2.0), 1e-6);
}

TEST(KernelSummation, PlanSelection) {
  EXPECT_EQ(plan_summation(fkdv(-2.0), 1000, Summation::Auto, 0.9).mode, Summation::Direct);
  EXPECT_EQ(plan_summation(fkdv(-1.0), 1000, Summation::Auto, 0.9).mode, Summation::AbelRichardson);
  EXPECT_EQ(plan_summation(whitham(), 1000, Summation::Auto, 0.9).mode, Summation::AbelRichardson);
  EXPECT_THROW(plan_summation(fkdv(-0.05), 1000, Summation::Direct, 0.9), CapabilityError);
}

TEST(KernelSummation, GridBuildMatchesPointwiseSeries) {
  const PeriodicGrid g(64);
  for (const auto& s : {whitham(), fkdv(-0.5), bessel(-1.0)}) {
    KernelOptions o;
    o.M = 200000;
    const auto kt = build_kernel(s, g, o);
    for (int j : {1, 9, 20, 40, 63}) EXPECT_NEAR(kt.values[static_cast<std::size_t>(j)], kernel_value(s, g.x(j), o), 1e-9) << s.label();
  }
}

TEST(KernelSummation, EvennessForAllBuiltins) {
  const PeriodicGrid g(512);
  for (const auto& s : cm_builtins()) {
    const auto kt = build_kernel(s, g);
    EXPECT_LE(evenness_defect(kt), 1e-12) << s.label();
  }
}

TEST(Theta, Values) {
  EXPECT_EQ(theta3(1.3, 0.0), 1.0);
  double direct = 1.0;
  for (int k = 1; k < 40; ++k) direct += 2 * std::pow(0.5, double(k) * k);
  EXPECT_NEAR(theta3(0.0, 0.5), direct, 1e-15);
  EXPECT_NEAR(theta3(0.0, 0.5), 2.128936, 1e-6);
  for (double u : {0.1, 0.5, 0.9, 0.99}) EXPECT_LT(theta3(kPi / 2, u), theta3(0.0, u));
  EXPECT_THROW(theta3(0.0, 1.0), DomainError);
}

TEST(Theta, AtomKernelMatchesSeries) {
  const PeriodicGrid g(256);
  const MeasureAtoms single({{0.5, 1.0}});
  const auto kt = kernel_from_atoms(single, g);
  EXPECT_NEAR(kt.at_offset(0), theta3(0.0, 0.5), 1e-15);
  const auto series = build_kernel(from_atoms(single), g);
  for (int j = 0; j < g.n(); ++j) EXPECT_NEAR(kt.values[static_cast<std::size_t>(j)], series.values[static_cast<std::size_t>(j)], 1e-10);
  std::mt19937_64 rng(2024);
  for (int t = 0; t < 20; ++t) {
    const auto a = random_atoms(rng);
    const auto th = kernel_from_atoms(a, g);
    const auto se = build_kernel(from_atoms(a), g);
    double d = 0.0;
    for (int j = 0; j < g.n(); ++j) d = std::max(d, std::abs(th.values[static_cast<std::size_t>(j)] - se.values[static_cast<std::size_t>(j)]));
    EXPECT_LE(d, 1e-10);
  }
  const auto zero = kernel_from_atoms(MeasureAtoms({{0.4, 0.0}}), g);
  for (double v : zero.values) EXPECT_EQ(v, 0.0);
}

TEST(Theta, UnitAtomIsDegenerate) {
  const PeriodicGrid g(64);
  EXPECT_THROW(kernel_from_atoms(MeasureAtoms({{1.0, 1.0}}), g), DomainError);
  const auto kt = build_kernel(from_atoms(MeasureAtoms({{1.0, 1.0}})), g);
  EXPECT_TRUE(kt.degenerate);
  const auto v = check_monotone_half_period(kt);
  EXPECT_TRUE(v.excluded);
}

TEST(Monotone, BuiltinsDecreaseOnHalfPeriod) {
  const PeriodicGrid g(1024);
  for (const auto& s : cm_builtins()) {
    const auto v = check_monotone_half_period(build_kernel(s, g), 4 * g.spacing());
    EXPECT_TRUE(v.passed) << s.label() << " worst " << v.worst_violation << " at " << v.worst_x;
  }
  KernelOptions o;
  o.M = 100000;
  EXPECT_TRUE(check_monotone_half_period(build_kernel(whitham(), g, o), 0.05).passed);
}

TEST(Monotone, AtomKernelsDecrease) {
  const PeriodicGrid g(1024);
  std::mt19937_64 rng(77);
  for (int t = 0; t < 10; ++t) EXPECT_TRUE(check_monotone_half_period(kernel_from_atoms(random_atoms(rng), g)).passed);
}

TEST(Monotone, OscillatoryControlFails) {
  const PeriodicGrid g(1024);
  const auto v = check_monotone_half_period(build_kernel(nwl_test::oscillatory_control(), g));
  EXPECT_FALSE(v.passed);
  EXPECT_GT(v.worst_violation, 1e-3);
}

TEST(Origin, WhithamAndBurgersHilbert) {
  for (const auto& s : {whitham(), fkdv(-1.0)}) {
    const auto r = check_origin_behaviour(s, {10000, 100000, 1000000}, {0.1, 0.01, 0.001});
    EXPECT_TRUE(r.bounded_stable) << s.label() << " spread " << r.sup_spread;
    EXPECT_TRUE(r.strictly_decreasing) << s.label();
    EXPECT_TRUE(r.passed) << s.label();
    EXPECT_GT(r.fitted_exponent, 0.0);
  }
}

TEST(Origin, BoundedKernelDecaysLinearly) {
  const auto r = check_origin_behaviour(fkdv(-2.0), {10000, 100000}, {0.1, 0.01, 0.001}, 256);
  EXPECT_TRUE(r.strictly_decreasing);
  EXPECT_NEAR(r.fitted_exponent, 1.0, 0.05);
  // Burgers-Hilbert: sin(x) K(x) = -2 sin(x) ln(2 sin(x/2)) is bounded by its closed-form sup.
  double sup = 0.0;
  for (int j = 1; j < 10000; ++j) {
    const double x = kPi * j / 10000;
    sup = std::max(sup, std::abs(2 * std::sin(x) * std::log(2 * std::sin(x / 2))));
  }
  const auto bh = check_origin_behaviour(fkdv(-1.0), {100000}, {0.1, 0.01}, 1024);
  EXPECT_NEAR(bh.sup_sinK.at(0), sup, 0.02 * sup);
}

TEST(ApplyL, Eigenfunctions) {
  const PeriodicGrid g(128);
  const auto c = SpectralField::from_function(g, [](double x) { return std::cos(x); });
  const auto Lc = apply_L(whitham(), c);
  const auto s3 = SpectralField::from_function(g, [](double x) { return std::sin(3 * x); });
  const auto Ls = apply_L(fkdv(-2.0), s3);
  for (int j = 0; j < g.n(); ++j) {
    EXPECT_NEAR(Lc[j], std::sqrt(std::tanh(1.0)) * std::cos(g.x(j)), 1e-14);
    EXPECT_NEAR(Ls[j], std::sin(3 * g.x(j)) / 9, 1e-15);
  }
  EXPECT_THROW(apply_L(fkdv(-1.0), c + 1.0), DomainError);
}

TEST(ApplyL, Linear) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> nd;
  const PeriodicGrid g(64);
  std::vector<double> a(64), b(64);
  for (int j = 0; j < 64; ++j) {
    a[static_cast<std::size_t>(j)] = nd(rng);
    b[static_cast<std::size_t>(j)] = nd(rng);
  }
  const SpectralField f(g, a), h(g, b);
  const auto lhs = apply_L(whitham(), f * 2.5 + h * -0.75);
  const auto rhs = apply_L(whitham(), f) * 2.5 + apply_L(whitham(), h) * -0.75;
  EXPECT_LT(max_abs_difference(lhs, rhs), 1e-13);
}

TEST(ApplyL, QuadratureRouteAgrees) {
  std::mt19937_64 rng(42);
  std::normal_distribution<double> nd;
  const int n = 256;
  const PeriodicGrid g(n);
  std::vector<cplx> c(static_cast<std::size_t>(n), cplx(0.0));
  for (int k = 1; k <= 20; ++k) {
    const cplx v = cplx(nd(rng), nd(rng)) / double(k * k);
    c[static_cast<std::size_t>(k)] = v;
    c[static_cast<std::size_t>(n - k)] = std::conj(v);
  }
  c[0] = 0.3;
  const auto f = SpectralField::from_coeffs(g, c);
  const auto qk = make_quadrature_kernel(whitham(), n, 1000000);
  const auto quad = convolve_quadrature(qk, f);
  const auto mult = apply_L(whitham(), f);
  double d = 0.0;
  for (int j = 0; j < n; ++j) d = std::max(d, std::abs(quad[static_cast<std::size_t>(j)] - mult[j]));
  EXPECT_LE(d, 1e-6);
}

TEST(GpPositivity, BuiltinsRandomPairs) {
  const int n = 256;
  const PeriodicGrid g(n);
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> um(1, 2 * n - 1);
  for (const auto& s : cm_builtins()) {
    const auto kt = build_kernel(s, g);
    for (int t = 0; t < 50; ++t) {
      const int m = um(rng);
      std::vector<int> inside;
      for (int j = 0; j < n; ++j)
        if (in_open_half_period(j, m, n)) inside.push_back(j);
      const int i = inside[std::uniform_int_distribution<std::size_t>(0, inside.size() - 1)(rng)];
      const auto gp = gp_profile(kt, m, i);
      // The diagonal y = xbar carries K(0); every other point is finite.
      double mn = std::numeric_limits<double>::infinity();
      for (std::size_t q = 0; q < gp.indices.size(); ++q)
        if (gp.indices[q] != i) mn = std::min(mn, gp.values[q]);
      EXPECT_GT(mn, 0.0) << s.label() << " m=" << m << " i=" << i;
    }
  }
}

TEST(GpPositivity, EndpointsVanish) {
  const int n = 256;
  const auto kt = build_kernel(whitham(), PeriodicGrid(n));
  const int m = 2 * 100;  // grid-point axis
  const auto gp = gp_profile(kt, m, 170);
  EXPECT_NEAR(gp.at_lambda, 0.0, 1e-12);
  EXPECT_NEAR(gp.at_lambda_pi, 0.0, 1e-12);
}

TEST(GpPositivity, OscillatoryControlFails) {
  const int n = 256;
  const auto kt = build_kernel(nwl_test::oscillatory_control(), PeriodicGrid(n));
  bool negative = false;
  for (int m = 1; m < 2 * n && !negative; m += 7)
    for (int i = 0; i < n && !negative; i += 5) {
      if (!in_open_half_period(i, m, n)) continue;
      const auto gp = gp_profile(kt, m, i);
      for (std::size_t q = 0; q < gp.indices.size(); ++q)
        if (gp.indices[q] != i && gp.values[q] < 0.0) negative = true;
    }
  EXPECT_TRUE(negative);
}

TEST(KernelIo, CsvAndMetadata) {
  const auto kt = build_kernel(fkdv(-2.0), PeriodicGrid(16));
  const auto csv = kernel_csv(kt);
  EXPECT_EQ(csv.substr(0, 4), "x,K\n");
  const auto meta = kernel_metadata(kt);
  EXPECT_EQ(meta["summation"], "direct");
  EXPECT_EQ(meta["truncation"], 100000);
}

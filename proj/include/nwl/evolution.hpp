#pragma once

// Pseudospectral RK4 integration of u_t + (u^2 + L u)_x = 0.

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "nwl/errors.hpp"
#include "nwl/solver.hpp"
#include "nwl/spectral.hpp"
#include "nwl/symbols.hpp"

namespace nwl {

struct EvolutionOptions {
  double dt = 0.0;  ///< 0 picks the stable step
  double t_end = 1.0;
  int snapshot_stride = 0;  ///< steps between snapshots, 0 keeps only the ends
  bool nonlinear = true;
  double cfl = 1.0;
  double blowup_factor = 1e3;
};

struct EvolutionRun {
  Symbol symbol;
  SpectralField initial;
  SpectralField final_state;
  double dt = 0.0;
  double t_end = 0.0;
  int steps = 0;
  std::vector<std::pair<double, SpectralField>> snapshots;
  std::vector<double> times;
  std::vector<double> mean;    ///< mean(u)
  std::vector<double> energy;  ///< mean(u^2)
};

namespace detail {

/// -ik (P(u^2)(k) + m(k) u(k)) in coefficient storage order.
inline std::vector<cplx> rhs_coeffs(const Symbol& s, const PeriodicGrid& g, const std::vector<cplx>& uc, bool nonlinear) {
  const int n = g.n();
  const SpectralField u = SpectralField::from_coeffs(g, uc);
  std::vector<cplx> sq(static_cast<std::size_t>(n), cplx(0.0));
  if (nonlinear) sq = multiply_dealiased(u, u).coeffs();
  std::vector<cplx> r(static_cast<std::size_t>(n), cplx(0.0));
  for (int idx = 1; idx < n; ++idx) {
    if (idx == n / 2) continue;
    const int k = signed_mode(idx, n);
    r[static_cast<std::size_t>(idx)] =
        cplx(0.0, -k) * (sq[static_cast<std::size_t>(idx)] + s(k) * u.coeffs()[static_cast<std::size_t>(idx)]);
  }
  return r;
}

}  // namespace detail

/// -d/dx (u^2 + L u) with the square dealiased.
inline SpectralField rhs(const SpectralField& u, const Symbol& s, bool nonlinear = true) {
  if (s.homogeneous() && std::abs(u.mean()) > 1e-12 * std::max(1.0, u.max_abs()))
    throw DomainError("rhs: homogeneous symbol requires a zero-mean field");
  return SpectralField::from_coeffs(u.grid(), detail::rhs_coeffs(s, u.grid(), u.coeffs(), nonlinear));
}

/// Largest dt with dt * max_k |k m(k) + 2 k max|u|| <= cfl.
inline double stable_dt(const SpectralField& u, const Symbol& s, double cfl = 1.0, bool nonlinear = true) {
  const int n = u.size();
  const double umax = nonlinear ? u.max_abs() : 0.0;
  double rate = 0.0;
  for (int k = 1; k < n / 2; ++k) rate = std::max(rate, std::abs(k * s(k) + 2.0 * k * umax));
  return rate > 0.0 ? cfl / rate : 1.0;
}

inline SpectralField step_rk4(const SpectralField& u, const Symbol& s, double dt, bool nonlinear = true) {
  const auto& g = u.grid();
  const auto& c0 = u.coeffs();
  const std::size_t n = c0.size();
  auto axpy = [&](const std::vector<cplx>& x, double a, const std::vector<cplx>& y) {
    std::vector<cplx> z(n);
    for (std::size_t i = 0; i < n; ++i) z[i] = x[i] + a * y[i];
    return z;
  };
  const auto k1 = detail::rhs_coeffs(s, g, c0, nonlinear);
  const auto k2 = detail::rhs_coeffs(s, g, axpy(c0, 0.5 * dt, k1), nonlinear);
  const auto k3 = detail::rhs_coeffs(s, g, axpy(c0, 0.5 * dt, k2), nonlinear);
  const auto k4 = detail::rhs_coeffs(s, g, axpy(c0, dt, k3), nonlinear);
  std::vector<cplx> c1(n);
  for (std::size_t i = 0; i < n; ++i) c1[i] = c0[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  return SpectralField::from_coeffs(g, c1);
}

/// Fixed-step RK4 to t_end; the last step is shortened to land on t_end.
inline EvolutionRun integrate(const SpectralField& u0, const Symbol& s, const EvolutionOptions& opt) {
  if (!(opt.t_end >= 0.0)) throw DomainError("integrate: t_end must be nonnegative");
  EvolutionRun run{s, u0, u0};
  run.t_end = opt.t_end;
  run.dt = opt.dt > 0.0 ? opt.dt : stable_dt(u0, s, opt.cfl, opt.nonlinear);
  const double limit = opt.blowup_factor * std::max(u0.max_abs(), 1e-300);
  auto record = [&](double t, const SpectralField& u) {
    run.times.push_back(t);
    run.mean.push_back(u.mean());
    double e = 0.0;
    for (const auto& c : u.coeffs()) e += std::norm(c);
    run.energy.push_back(e);
  };
  SpectralField u = u0;
  double t = 0.0;
  record(t, u);
  run.snapshots.emplace_back(t, u);
  const long nsteps = static_cast<long>(std::ceil(opt.t_end / run.dt - 1e-12));
  for (long i = 0; i < nsteps; ++i) {
    const double h = std::min(run.dt, opt.t_end - t);
    u = step_rk4(u, s, h, opt.nonlinear);
    t = (i + 1 == nsteps) ? opt.t_end : t + h;
    ++run.steps;
    const double m = u.max_abs();
    if (!std::isfinite(m) || (u0.max_abs() > 0.0 && m > limit)) throw InstabilityError("integrate: blow-up", t);
    record(t, u);
    if (opt.snapshot_stride > 0 && run.steps % opt.snapshot_stride == 0 && i + 1 != nsteps) run.snapshots.emplace_back(t, u);
  }
  if (nsteps > 0) run.snapshots.emplace_back(t, u);
  run.final_state = u;
  return run;
}

struct TravelingReport {
  double drift = 0.0;
  double period = 0.0;
  double dt = 0.0;
  int steps = 0;
  double mean_drift = 0.0;  ///< max |mean(u(t)) - mean(u0)|
  double symmetry_defect_growth = 0.0;
};

/// Integrates a steady profile over `periods` * 2pi / c and compares with the
/// exact translate phi(x - cT).
inline TravelingReport traveling_check(const WaveProfile& p, int periods = 1, double dt = 0.0) {
  TravelingReport rep;
  if (p.phi.max_abs() == 0.0) return rep;
  EvolutionOptions opt;
  opt.t_end = periods * 2.0 * kPi / p.c;
  opt.dt = dt;
  const auto run = integrate(p.phi, p.symbol, opt);
  const auto expected = translate(p.phi, p.c * opt.t_end);
  rep.drift = max_abs_difference(run.final_state, expected);
  rep.period = opt.t_end;
  rep.dt = run.dt;
  rep.steps = run.steps;
  for (double m : run.mean) rep.mean_drift = std::max(rep.mean_drift, std::abs(m - run.mean.front()));
  return rep;
}

/// Observed order log2(|u_dt - u_dt/2| / |u_dt/2 - u_dt/4|).
inline double self_convergence_order(const SpectralField& u0, const Symbol& s, double dt, double t_end,
                                     bool nonlinear = true) {
  EvolutionOptions o;
  o.t_end = t_end;
  o.nonlinear = nonlinear;
  o.dt = dt;
  const auto a = integrate(u0, s, o).final_state;
  o.dt = dt / 2;
  const auto b = integrate(u0, s, o).final_state;
  o.dt = dt / 4;
  const auto c = integrate(u0, s, o).final_state;
  return std::log2(max_abs_difference(a, b) / max_abs_difference(b, c));
}

inline nlohmann::json to_json(const TravelingReport& r) {
  return {{"drift", r.drift}, {"period", r.period}, {"dt", r.dt}, {"steps", r.steps}, {"mean_drift", r.mean_drift}};
}

}  // namespace nwl

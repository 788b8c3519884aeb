#pragma once

// Reflection criterion, moving-plane supremum, symmetry defect, crest
// structure and numerical verifiers of the touching and boundary-point
// lemmas.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nwl/errors.hpp"
#include "nwl/kernel.hpp"
#include "nwl/solver.hpp"
#include "nwl/spectral.hpp"

namespace nwl {

/// True when x_j lies in (lambda, lambda + pi) mod 2pi, staying `gap` away
/// from both endpoints.
inline bool in_half_period(double x, double lambda, double gap = 0.0) {
  double t = std::fmod(x - lambda, 2.0 * kPi);
  if (t < 0.0) t += 2.0 * kPi;
  return t > gap && t < kPi - gap;
}

/// phi(x_j) - phi(2 lambda - x_j) on the grid, by spectral reflection.
inline std::vector<double> reflection_gap(const SpectralField& phi, double lambda) {
  const auto r = reflect(phi, lambda);
  std::vector<double> w(static_cast<std::size_t>(phi.size()));
  for (int j = 0; j < phi.size(); ++j) w[static_cast<std::size_t>(j)] = phi[j] - r[j];
  return w;
}

/// Same for a half-grid axis lambda = -pi + pi m / n, by exact index lookup.
inline std::vector<double> reflection_gap_half_grid(const SpectralField& phi, int m) {
  const int n = phi.size();
  std::vector<double> w(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) w[static_cast<std::size_t>(j)] = phi[j] - phi[((m - j) % n + n) % n];
  return w;
}

/// w > strictness at every grid point of (lambda, lambda + pi) for a half-grid axis.
inline bool criterion_holds_half_grid(const SpectralField& phi, int m, double strictness) {
  const int n = phi.size();
  const auto w = reflection_gap_half_grid(phi, m);
  bool any = false;
  for (int j = 0; j < n; ++j) {
    if (!in_open_half_period(j, m, n)) continue;
    any = true;
    if (!(w[static_cast<std::size_t>(j)] > strictness)) return false;
  }
  return any;
}

/// First half-grid axis lambda (scanning up from -pi) witnessing the
/// reflection criterion.
inline std::optional<double> reflection_criterion(const SpectralField& phi, double strictness = 0.0) {
  const int n = phi.size();
  for (int m = 0; m < 2 * n; ++m)
    if (criterion_holds_half_grid(phi, m, strictness)) return half_grid_axis(m, n);
  return std::nullopt;
}

struct LambdaZero {
  double lambda0 = 0.0;
  double lambda_star = 0.0;
  int evaluations = 0;
};

/// sup of lambda in [lambda*, 0] with w_lambda > 0 on (lambda, lambda + pi).
/// Upward scan in steps of h/4 followed by bisection to `tol`. Points within
/// 1e-3 h of the interval ends are not tested.
inline LambdaZero moving_plane_lambda0(const SpectralField& phi, double lambda_star, double tol = 1e-6,
                                       double strictness = 0.0) {
  const double h = phi.grid().spacing();
  const double gap = 1e-3 * h;
  LambdaZero out;
  out.lambda_star = lambda_star;
  auto positive = [&](double lambda) {
    ++out.evaluations;
    const auto w = reflection_gap(phi, lambda);
    bool any = false;
    for (int j = 0; j < phi.size(); ++j) {
      if (!in_half_period(phi.grid().x(j), lambda, gap)) continue;
      any = true;
      if (!(w[static_cast<std::size_t>(j)] > strictness)) return false;
    }
    return any;
  };
  if (!positive(lambda_star)) throw InconsistencyError("moving_plane_lambda0: criterion fails at lambda*");
  double good = lambda_star;
  double bad = std::numeric_limits<double>::quiet_NaN();
  for (double l = lambda_star + 0.25 * h; l <= 0.0; l += 0.25 * h) {
    if (positive(l)) {
      good = l;
    } else {
      bad = l;
      break;
    }
  }
  if (std::isnan(bad)) {
    if (positive(0.0)) {
      out.lambda0 = 0.0;
      return out;
    }
    bad = 0.0;
  }
  while (bad - good > tol) {
    const double mid = 0.5 * (good + bad);
    if (positive(mid)) good = mid;
    else bad = mid;
  }
  out.lambda0 = good;
  return out;
}

struct DefectResult {
  double defect = 0.0;
  double axis = 0.0;  ///< in [-pi/2, pi/2)
};

inline double defect_at(const SpectralField& phi, double lambda) {
  const auto w = reflection_gap(phi, lambda);
  double d = 0.0;
  for (double v : w) d = std::max(d, std::abs(v));
  return d;
}

/// min over axes of max_j |phi(x_j) - phi(2 lambda - x_j)|. Seeds: the phase
/// of the dominant low mode and a half-grid axis scan; refinement by golden
/// section.
inline DefectResult symmetry_defect(const SpectralField& phi) {
  const int n = phi.size();
  auto wrap = [](double l) {
    l = std::fmod(l + 0.5 * kPi, kPi);
    if (l < 0.0) l += kPi;
    return l - 0.5 * kPi;
  };
  // Spectral seed: axis a with c(k) = |c(k)| e^{-i k a}.
  int kseed = 1;
  if (std::abs(phi.coeff(1)) < 1e-14) {
    double best = -1.0;
    for (int k = 1; k < n / 2; ++k)
      if (std::abs(phi.coeff(k)) > best) {
        best = std::abs(phi.coeff(k));
        kseed = k;
      }
  }
  std::vector<double> seeds;
  const double a = -std::arg(phi.coeff(kseed)) / kseed;
  for (int q = 0; q < kseed; ++q) seeds.push_back(wrap(a + kPi * q / kseed));
  // Coarse scan over half-grid axes (exact lookups), both alignments mod pi.
  double best_scan = std::numeric_limits<double>::infinity();
  int m_best = 0;
  for (int m = 0; m < n; ++m) {
    const auto w = reflection_gap_half_grid(phi, m);
    double d = 0.0;
    for (double v : w) d = std::max(d, std::abs(v));
    if (d < best_scan) {
      best_scan = d;
      m_best = m;
    }
  }
  seeds.push_back(wrap(half_grid_axis(m_best, n)));
  DefectResult best{std::numeric_limits<double>::infinity(), 0.0};
  const double half = kPi / n;
  for (double s0 : seeds) {
    double lo = s0 - half, hi = s0 + half;
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
    double f1 = defect_at(phi, x1), f2 = defect_at(phi, x2);
    for (int it = 0; it < 80 && hi - lo > 1e-13; ++it) {
      if (f1 < f2) {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - gr * (hi - lo);
        f1 = defect_at(phi, x1);
      } else {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + gr * (hi - lo);
        f2 = defect_at(phi, x2);
      }
    }
    for (double cand : {s0, x1, x2}) {
      const double d = defect_at(phi, cand);
      if (d < best.defect) best = {d, wrap(cand)};
    }
  }
  return best;
}

struct CrestCount {
  int crests = 0;
  bool tie_within_tolerance = false;  ///< the top plateau spans several grid points
};

/// Strict local maxima of the cyclic grid sequence after merging runs of
/// neighbours within plateau_tol.
inline CrestCount crest_count(const SpectralField& phi, double plateau_tol = -1.0) {
  const int n = phi.size();
  if (plateau_tol < 0.0) plateau_tol = 1e-12 * std::max(1.0, phi.max_abs());
  // Start the cyclic walk at a point that differs from its predecessor.
  int start = -1;
  for (int j = 0; j < n; ++j)
    if (std::abs(phi[j] - phi[(j + n - 1) % n]) > plateau_tol) {
      start = j;
      break;
    }
  CrestCount out;
  if (start < 0) return out;  // one merged plateau
  std::vector<double> level;
  std::vector<int> width;
  for (int t = 0; t < n; ++t) {
    const int j = (start + t) % n;
    if (!level.empty() && std::abs(phi[j] - phi[(j + n - 1) % n]) <= plateau_tol) {
      ++width.back();
      continue;
    }
    level.push_back(phi[j]);
    width.push_back(1);
  }
  const int m = static_cast<int>(level.size());
  const double top = phi.max();
  for (int i = 0; i < m; ++i) {
    const double l = level[static_cast<std::size_t>((i + m - 1) % m)];
    const double r = level[static_cast<std::size_t>((i + 1) % m)];
    const double v = level[static_cast<std::size_t>(i)];
    if (v > l && v > r) {
      ++out.crests;
      if (width[static_cast<std::size_t>(i)] > 1 && std::abs(v - top) <= plateau_tol) out.tie_within_tolerance = true;
    }
  }
  return out;
}

struct MonotoneHalf {
  bool passed = false;
  double min_derivative = 0.0;
  double worst_x = 0.0;
  double tolerance = 0.0;
  int excluded_cells = 0;
};

/// phi' > 1e-10 max|phi'| at interior grid points of (-pi, 0), after moving
/// the crest to 0 by an index roll. `exclude_cells` grid points next to the
/// crest are skipped.
inline MonotoneHalf monotone_half_period(const SpectralField& phi, int exclude_cells = 0) {
  const int n = phi.size();
  const int shift = phi.grid().origin_index() - phi.argmax();
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) v[static_cast<std::size_t>(((j + shift) % n + n) % n)] = phi[j];
  const auto d = derivative(SpectralField(phi.grid(), v));
  MonotoneHalf out;
  out.excluded_cells = exclude_cells;
  out.tolerance = 1e-10 * d.max_abs();
  out.min_derivative = std::numeric_limits<double>::infinity();
  for (int j = 1; j < n / 2 - exclude_cells; ++j) {
    if (d[j] < out.min_derivative) {
      out.min_derivative = d[j];
      out.worst_x = phi.grid().x(j);
    }
  }
  out.passed = out.min_derivative > out.tolerance;
  return out;
}

// ---------------------------------------------------------------------------
// Touching lemma

enum class TouchingVerdict { IdenticallyEqual, ContradictionConfirmed, Violated };

inline const char* to_string(TouchingVerdict v) {
  switch (v) {
    case TouchingVerdict::IdenticallyEqual: return "identically-equal";
    case TouchingVerdict::ContradictionConfirmed: return "contradiction-confirmed";
    case TouchingVerdict::Violated: return "violated";
  }
  return "unknown";
}

struct TouchingReport {
  TouchingVerdict verdict = TouchingVerdict::Violated;
  double lambda = 0.0;  ///< snapped to the half grid
  double xbar = 0.0;    ///< snapped to the grid
  bool touching_point = false;  ///< w(xbar) = 0 or (phi + phibar)(xbar) >= c
  double w_at_xbar = 0.0;
  double sum_at_xbar = 0.0;
  double Lw_quadrature = 0.0;
  double Lw_multiplier = 0.0;
  double gp_min = 0.0;
  double gp_min_y = 0.0;
  double oddness_defect = 0.0;
};

struct TouchingOptions {
  long M = 1000000;
  int refine = 16;
  double zero_tol = 1e-8;
};

inline int snap_half_grid(double lambda, int n) {
  const long m = std::lround((lambda + kPi) * n / kPi);
  return static_cast<int>(((m % (2 * n)) + 2 * n) % (2 * n));
}

inline int snap_grid(double x, int n) {
  const long j = std::lround((x + kPi) * n / (2.0 * kPi));
  return static_cast<int>(((j % n) + n) % n);
}

/// phibar is built as the reflection of phi about the snapped axis, so
/// w = phi - phibar is odd about it by construction.
inline TouchingReport verify_touching(const WaveProfile& p, double lambda, double xbar, const KernelTable& kt,
                                      const TouchingOptions& opt = {}) {
  const int n = p.phi.size();
  if (kt.n() != n) throw DomainError("verify_touching: kernel grid does not match the profile");
  TouchingReport rep;
  const int m = snap_half_grid(lambda, n);
  const int i = snap_grid(xbar, n);
  rep.lambda = half_grid_axis(m, n);
  rep.xbar = p.phi.grid().x(i);
  if (!in_open_half_period(i, m, n)) throw DomainError("verify_touching: xbar must lie in (lambda, lambda + pi)");
  std::vector<double> rv(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) rv[static_cast<std::size_t>(j)] = p.phi[((m - j) % n + n) % n];
  const SpectralField phibar(p.phi.grid(), rv);
  const SpectralField w = p.phi - phibar;
  for (int j = 0; j < n; ++j)
    rep.oddness_defect = std::max(rep.oddness_defect, std::abs(w[j] + w[((m - j) % n + n) % n]));
  if (rep.oddness_defect > 1e-8) throw DomainError("verify_touching: w is not odd about lambda");
  for (int j = 0; j < n; ++j)
    if (in_open_half_period(j, m, n) && w[j] < -1e-10)
      throw DomainError("verify_touching: w is negative on (lambda, lambda + pi)");
  if (w.max_abs() <= 1e-12 * std::max(1.0, p.phi.max_abs())) {
    rep.verdict = TouchingVerdict::IdenticallyEqual;
    return rep;
  }
  rep.w_at_xbar = w[i];
  rep.sum_at_xbar = p.phi[i] + phibar[i];
  rep.touching_point = std::abs(rep.w_at_xbar) <= opt.zero_tol || rep.sum_at_xbar >= p.c;
  const auto qk = make_quadrature_kernel(p.symbol, n, opt.M, opt.refine);
  rep.Lw_quadrature = convolve_quadrature(qk, w)[static_cast<std::size_t>(i)];
  rep.Lw_multiplier = apply_L_unchecked(p.symbol, w)[i];
  const auto gp = gp_profile(kt, m, i);
  // The singular sample y = xbar is excluded from the positivity scan.
  rep.gp_min = std::numeric_limits<double>::infinity();
  for (std::size_t q = 0; q < gp.indices.size(); ++q) {
    if (gp.indices[q] == i) continue;
    if (gp.values[q] < rep.gp_min) {
      rep.gp_min = gp.values[q];
      rep.gp_min_y = p.phi.grid().x(gp.indices[q]);
    }
  }
  rep.verdict = (rep.Lw_quadrature > 0.0 && rep.gp_min > 0.0) ? TouchingVerdict::ContradictionConfirmed
                                                                : TouchingVerdict::Violated;
  return rep;
}

// ---------------------------------------------------------------------------
// Boundary-point lemma

enum class BoundaryVerdict { IdenticallyEqual, Positive, Violated };

inline const char* to_string(BoundaryVerdict v) {
  switch (v) {
    case BoundaryVerdict::IdenticallyEqual: return "identically-equal";
    case BoundaryVerdict::Positive: return "positive";
    case BoundaryVerdict::Violated: return "violated";
  }
  return "unknown";
}

struct BoundaryRoutes {
  double direct = 0.0;      ///< trapezoid of K(lambda - y) w'(y), singular part subtracted
  double by_parts = 0.0;    ///< extrapolated 2 int_{lambda+eps}^{lambda+pi} K'(lambda - y) w(y) dy
  double multiplier = 0.0;  ///< 2 pi (L w')(lambda)
  std::vector<double> eps;
  std::vector<double> by_parts_eps;
  double fitted_exponent = 0.0;
  double relative_disagreement = 0.0;
};

struct BoundaryOptions {
  long M = 200000;
  int refine = 8;
  double agree_tol = 0.01;
  double resolution_tol = 0.05;
};

/// K * w'(lambda) = int K(lambda - y) w'(y) dy by two quadratures on the
/// grid refined `refine` times. lambda must be a half-grid axis of the
/// coarse grid (hence a grid point of the fine one).
inline BoundaryRoutes boundary_convolution_routes(const Symbol& s, const SpectralField& w, double lambda,
                                                  const BoundaryOptions& opt = {}) {
  const int n = w.size();
  const int R = opt.refine;
  if (R % 2 != 0) throw DomainError("boundary routes: refinement must be even");
  const int N = R * n;
  const PeriodicGrid fine_grid(N);
  const int m = snap_half_grid(lambda, n);
  const int I = (m * R / 2) % N;  // fine index of lambda
  BoundaryRoutes out;
  const SpectralField wc = apply_multiplier(w, [](int) { return 1.0; });
  const SpectralField dw = derivative(wc);
  out.multiplier = 2.0 * kPi * apply_L_unchecked(s, dw).evaluate(fine_grid.x(I));
  // Route (a): singular subtraction on the fine grid.
  const auto qk = make_quadrature_kernel(s, n, opt.M, R);
  out.direct = 2.0 * kPi * convolve_quadrature_at(qk, resample(dw, N), I);
  // Route (b): integrated by parts, eps-exclusion at 4, 2, 1 coarse cells.
  KernelOptions ko;
  ko.M = std::max<long>(opt.M, N);
  const auto dK = build_kernel_derivative(s, fine_grid, ko);
  const auto wf = resample(wc, N);
  const double hf = fine_grid.spacing();
  for (int cells : {4, 2, 1}) {
    const int e = cells * R;
    // Trapezoid over y = lambda + d hf for d = e .. N/2, integrand K'(-d hf) w.
    detail::CompensatedSum acc;
    for (int d = e; d <= N / 2; ++d) {
      const double wt = (d == e || d == N / 2) ? 0.5 : 1.0;
      const double Kp = dK[static_cast<std::size_t>(((N / 2 - d) % N + N) % N)];
      acc.add(wt * Kp * wf[(I + d) % N]);
    }
    out.eps.push_back(e * hf);
    out.by_parts_eps.push_back(2.0 * hf * acc.value());
  }
  const double v1 = out.by_parts_eps[0], v2 = out.by_parts_eps[1], v3 = out.by_parts_eps[2];
  const double d1 = v1 - v2, d2 = v2 - v3;
  if (d2 != 0.0 && d1 / d2 > 1.0) {
    const double g = d1 / d2;  // = 2^p
    out.fitted_exponent = std::log2(g);
    out.by_parts = v3 - d2 / (g - 1.0);
  } else {
    out.fitted_exponent = 0.0;
    out.by_parts = v3;
  }
  out.relative_disagreement = std::abs(out.direct - out.by_parts) / std::max(std::abs(out.direct), 1e-300);
  return out;
}

struct BoundaryReport {
  BoundaryVerdict verdict = BoundaryVerdict::Violated;
  double lambda = 0.0;
  BoundaryRoutes routes;
  double wprime = 0.0;
  double coefficient = 0.0;  ///< c - (phi + phibar)(lambda)
  double identity_defect = 0.0;  ///< |coefficient * w' - (L w')(lambda)|
  bool routes_agree = false;
};

/// Boundary-point check for w = phi - phibar, odd about lambda.
inline BoundaryReport verify_boundary_point(const WaveProfile& phi, const WaveProfile& phibar, double lambda,
                                            const BoundaryOptions& opt = {}) {
  const int n = phi.phi.size();
  if (!(phi.phi.grid() == phibar.phi.grid())) throw DomainError("verify_boundary_point: grid mismatch");
  BoundaryReport rep;
  const int m = snap_half_grid(lambda, n);
  rep.lambda = half_grid_axis(m, n);
  const SpectralField w = phi.phi - phibar.phi;
  const auto wr = reflect(w, rep.lambda);
  double odd = 0.0;
  for (int j = 0; j < n; ++j) odd = std::max(odd, std::abs(w[j] + wr[j]));
  if (odd > 1e-8 * std::max(1.0, w.max_abs())) throw DomainError("verify_boundary_point: w is not odd about lambda");
  if (w.max_abs() <= 1e-12 * std::max(1.0, phi.phi.max_abs())) {
    rep.verdict = BoundaryVerdict::IdenticallyEqual;
    return rep;
  }
  for (int j = 0; j < n; ++j)
    if (in_half_period(phi.phi.grid().x(j), rep.lambda) && w[j] < -1e-10)
      throw DomainError("verify_boundary_point: w is negative on (lambda, lambda + pi)");
  rep.routes = boundary_convolution_routes(phi.symbol, w, rep.lambda, opt);
  if (rep.routes.relative_disagreement > opt.resolution_tol)
    throw ResolutionError("verify_boundary_point: quadrature routes disagree by " +
                          std::to_string(100.0 * rep.routes.relative_disagreement) + "%; increase n or M");
  rep.routes_agree = rep.routes.relative_disagreement <= opt.agree_tol;
  rep.wprime = derivative(w).evaluate(rep.lambda);
  rep.coefficient = phi.c - (phi.phi.evaluate(rep.lambda) + phibar.phi.evaluate(rep.lambda));
  rep.identity_defect = std::abs(rep.coefficient * rep.wprime - rep.routes.multiplier / (2.0 * kPi));
  const bool positive = rep.routes.direct > 0.0 && rep.routes.by_parts > 0.0;
  const bool slope_ok = !(rep.coefficient > 0.0) || rep.wprime > 0.0;
  rep.verdict = (positive && rep.routes_agree && slope_ok) ? BoundaryVerdict::Positive : BoundaryVerdict::Violated;
  return rep;
}

// ---------------------------------------------------------------------------
// Audit

struct SymmetryReport {
  std::optional<double> lambda_star;
  std::optional<double> lambda0;
  double defect = 0.0;
  double best_axis = 0.0;
  int crest_count = 0;
  bool tie_within_tolerance = false;
  bool monotone_half_period = false;
  double spectral_tail = 0.0;
  std::map<std::string, nlohmann::json> verifier_outcomes;
  /// theorem_confirmed | theorem_violated | under_resolved | criterion_not_met | not_a_solution
  std::string status;
  bool passed = false;
};

struct AuditOptions {
  double solve_tolerance = 1e-10;
  double audit_tol = 1e-8;
  double strictness = 0.0;
  double near_highest = 0.98;  ///< crest cell excluded above this height ratio
  double resolved_tail = 1e-9;  ///< relative spectral tail below which a profile counts as resolved
};

/// sum_{|k| >= n/4} |c_k| / max|phi|: size of the unresolved part of a field.
inline double spectral_tail(const SpectralField& phi) {
  const int n = phi.size();
  double t = 0.0;
  for (int idx = 0; idx < n; ++idx)
    if (std::abs(detail::signed_mode(idx, n)) >= n / 4) t += std::abs(phi.coeffs()[static_cast<std::size_t>(idx)]);
  return t / std::max(phi.max_abs(), 1e-300);
}

inline SymmetryReport full_symmetry_audit(const WaveProfile& p, const AuditOptions& opt = {}) {
  SymmetryReport rep;
  const auto& phi = p.phi;
  const auto d = symmetry_defect(phi);
  rep.defect = d.defect;
  rep.best_axis = d.axis;
  const auto cc = crest_count(phi);
  rep.crest_count = cc.crests;
  rep.tie_within_tolerance = cc.tie_within_tolerance;
  const int excl = p.height_ratio() >= opt.near_highest ? 1 : 0;
  const auto mono = monotone_half_period(phi, excl);
  rep.monotone_half_period = mono.passed;
  rep.verifier_outcomes["monotone_half_period"] = {{"passed", mono.passed},
                                                   {"min_derivative", mono.min_derivative},
                                                   {"worst_x", mono.worst_x},
                                                   {"tolerance", mono.tolerance},
                                                   {"excluded_cells", mono.excluded_cells}};
  rep.verifier_outcomes["symmetry_defect"] = {{"defect", d.defect}, {"axis", d.axis}, {"passed", d.defect <= opt.audit_tol}};
  rep.verifier_outcomes["crest_count"] = {{"crests", cc.crests}, {"tie_within_tolerance", cc.tie_within_tolerance},
                                          {"passed", cc.crests == 1}};
  rep.lambda_star = reflection_criterion(phi, opt.strictness);
  if (rep.lambda_star) {
    // Normalize: global minimum to x = -pi.
    const double xmin = phi.grid().x(phi.argmin());
    const auto shifted = translate(phi, -kPi - xmin);
    const auto ls = reflection_criterion(shifted, opt.strictness);
    if (ls) {
      try {
        rep.lambda0 = moving_plane_lambda0(shifted, *ls).lambda0;
        rep.verifier_outcomes["moving_plane"] = {{"lambda_star", *ls}, {"lambda0", *rep.lambda0}, {"passed", true}};
      } catch (const Error& e) {
        rep.verifier_outcomes["moving_plane"] = {{"passed", false}, {"error", e.what()}};
      }
    }
  }
  if (p.residual_norm > opt.solve_tolerance) {
    rep.status = "not_a_solution";
    rep.passed = false;
    return rep;
  }
  if (!rep.lambda_star) {
    rep.status = "criterion_not_met";
    rep.passed = false;
    return rep;
  }
  rep.spectral_tail = spectral_tail(phi);
  rep.passed = rep.defect <= opt.audit_tol && rep.crest_count == 1 && rep.monotone_half_period;
  if (rep.passed) rep.status = "theorem_confirmed";
  else if (rep.spectral_tail > opt.resolved_tail) rep.status = "under_resolved";
  else rep.status = "theorem_violated";
  return rep;
}

inline nlohmann::json to_json(const SymmetryReport& r) {
  nlohmann::json out = {{"lambda_star", r.lambda_star ? nlohmann::json(*r.lambda_star) : nlohmann::json(nullptr)},
                        {"lambda0", r.lambda0 ? nlohmann::json(*r.lambda0) : nlohmann::json(nullptr)},
                        {"defect", r.defect},
                        {"best_axis", r.best_axis},
                        {"crest_count", r.crest_count},
                        {"tie_within_tolerance", r.tie_within_tolerance},
                        {"monotone_half_period", r.monotone_half_period},
                        {"spectral_tail", r.spectral_tail},
                        {"status", r.status},
                        {"passed", r.passed}};
  nlohmann::json v = nlohmann::json::object();
  for (const auto& [k, val] : r.verifier_outcomes) v[k] = val;
  out["verifier_outcomes"] = v;
  return out;
}

inline nlohmann::json to_json(const TouchingReport& r) {
  return {{"verdict", to_string(r.verdict)},     {"lambda", r.lambda},
          {"xbar", r.xbar},                       {"touching_point", r.touching_point},
          {"w_at_xbar", r.w_at_xbar},             {"sum_at_xbar", r.sum_at_xbar},
          {"Lw_quadrature", r.Lw_quadrature},     {"Lw_multiplier", r.Lw_multiplier},
          {"gp_min", std::isfinite(r.gp_min) ? r.gp_min : 0.0},
          {"gp_min_y", r.gp_min_y},               {"oddness_defect", r.oddness_defect}};
}

inline nlohmann::json to_json(const BoundaryReport& r) {
  return {{"verdict", to_string(r.verdict)},
          {"lambda", r.lambda},
          {"direct", r.routes.direct},
          {"by_parts", r.routes.by_parts},
          {"multiplier", r.routes.multiplier},
          {"eps", r.routes.eps},
          {"by_parts_eps", r.routes.by_parts_eps},
          {"fitted_exponent", r.routes.fitted_exponent},
          {"relative_disagreement", r.routes.relative_disagreement},
          {"routes_agree", r.routes_agree},
          {"wprime", r.wprime},
          {"coefficient", r.coefficient},
          {"identity_defect", r.identity_defect}};
}

}  // namespace nwl

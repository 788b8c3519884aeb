#pragma once

// The periodic convolution kernel K(x) = sum_k m(k) cos(kx) of a multiplier
// L, its theta-function representation for atom-synthesized symbols, and the
// numerical checks of evenness, half-period decrease and origin behaviour.
//
// Normalization: L f = (1/2pi) K * f with (K * f)(x) = int K(x-y) f(y) dy.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "nwl/errors.hpp"
#include "nwl/spectral.hpp"
#include "nwl/symbols.hpp"

namespace nwl {

enum class Summation {
  Auto,            ///< Direct for fast series, AbelRichardson for r >= -1
  Direct,          ///< plain truncation at M
  Abel,            ///< factor q^k
  AbelRichardson,  ///< factor 2 q^k - q^{2k}, removes the O(1-q) bias
};

inline const char* to_string(Summation s) {
  switch (s) {
    case Summation::Auto: return "auto";
    case Summation::Direct: return "direct";
    case Summation::Abel: return "abel";
    case Summation::AbelRichardson: return "abel_richardson";
  }
  return "unknown";
}

struct KernelOptions {
  long M = 0;  ///< 0 selects max(1e5, 100 n)
  Summation summation = Summation::Auto;
  double abel_q = 1.0 - 1e-6;
};

struct SummationPlan {
  Summation mode = Summation::Direct;
  long terms = 0;
  double q = 1.0;
  bool degenerate = false;  ///< constant symbol part: non-integrable kernel
};

inline long default_truncation(int n) { return std::max<long>(100000, 100L * n); }

inline SummationPlan plan_summation(const Symbol& s, long M, Summation requested, double q) {
  SummationPlan p;
  p.q = q;
  p.terms = M;
  const auto& atoms = s.atoms();
  p.degenerate = atoms && atoms->has_unit_atom();
  const double r = s.order();
  if (requested == Summation::Direct && r >= -0.1 && !(atoms && !p.degenerate))
    throw CapabilityError("kernel: series for order " + std::to_string(r) +
                          " is at divergence risk; use Abel summation");
  Summation mode = requested;
  if (mode == Summation::Auto) {
    if (p.degenerate || r >= -1.0) mode = Summation::AbelRichardson;
    else mode = Summation::Direct;
  }
  p.mode = mode;
  if (mode == Summation::Direct && atoms && !p.degenerate) {
    const double tmax = atoms->max_interior_t();
    if (tmax == 0.0) {
      p.terms = std::min<long>(M, 1);
    } else {
      const long kcut = static_cast<long>(std::ceil(std::sqrt(std::log(1e-20) / std::log(tmax)))) + 2;
      p.terms = std::min(M, kcut);
    }
  }
  if (mode == Summation::Abel || mode == Summation::AbelRichardson) {
    if (!(q > 0.0 && q < 1.0)) throw DomainError("kernel: Abel factor must lie in (0,1)");
    const long needed = static_cast<long>(std::ceil(std::log(1e-17) / std::log(q)));
    p.terms = std::max(M, needed);
  }
  return p;
}

namespace detail {

/// Coefficient weight applied to m(k) under a summation plan.
class SummationWeights {
 public:
  explicit SummationWeights(const SummationPlan& p) : p_(p) {}
  /// Must be called with k = 1, 2, 3, ... in order.
  double next(long k) {
    if (p_.mode == Summation::Direct) return 1.0;
    if (k % 1024 == 1 || k == 1) qk_ = std::pow(p_.q, static_cast<double>(k));
    else qk_ *= p_.q;
    if (p_.mode == Summation::Abel) return qk_;
    const double d = 1.0 - qk_;
    return 1.0 - d * d;
  }

 private:
  SummationPlan p_;
  double qk_ = 1.0;
};

/// Neumaier-compensated accumulator.
struct CompensatedSum {
  double sum = 0.0;
  double c = 0.0;
  void add(double v) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) c += (sum - t) + v;
    else c += (v - t) + sum;
    sum = t;
  }
  double value() const { return sum + c; }
};

/// Folds the weighted coefficients a_k (k = 1..terms), times k^power, into
/// residues mod N.
template <class Coef>
std::vector<double> fold_coefficients(Coef&& coef, long terms, int N) {
  std::vector<CompensatedSum> bins(static_cast<std::size_t>(N));
  int r = 0;
  for (long k = 1; k <= terms; ++k) {
    if (++r == N) r = 0;
    bins[static_cast<std::size_t>(r)].add(coef(k));
  }
  std::vector<double> out(static_cast<std::size_t>(N));
  for (int i = 0; i < N; ++i) out[static_cast<std::size_t>(i)] = bins[static_cast<std::size_t>(i)].value();
  return out;
}

/// sum_r A_r e^{i r x_j} on the grid x_j = -pi + 2 pi j / N.
inline std::vector<cplx> fold_to_grid(const std::vector<double>& A) {
  const int N = static_cast<int>(A.size());
  std::vector<cplx> in(static_cast<std::size_t>(N));
  for (int r = 0; r < N; ++r) in[static_cast<std::size_t>(r)] = ((r % 2) ? -1.0 : 1.0) * A[static_cast<std::size_t>(r)];
  return dft_inverse(in);
}

}  // namespace detail

/// Sampled kernel K on a periodic grid.
struct KernelTable {
  PeriodicGrid grid{8};
  std::vector<double> values;
  long truncation = 0;  ///< number of series terms summed
  Symbol symbol = whitham();
  bool includes_zero_mode = true;
  Summation summation = Summation::Direct;
  double abel_q = 1.0;
  double tail_bound = 0.0;
  std::string tail_bound_kind;
  bool degenerate = false;  ///< non-integrable boundary case (unit atom)

  int n() const noexcept { return grid.n(); }
  double at_index(int j) const { return values[static_cast<std::size_t>(((j % n()) + n()) % n())]; }
  /// K(2 pi d / n) for any integer offset d.
  double at_offset(long d) const {
    const long nn = n();
    return values[static_cast<std::size_t>((((d + nn / 2) % nn) + nn) % nn)];
  }
  double origin_value() const { return at_offset(0); }
};

namespace detail {

inline double tail_estimate(const Symbol& s, const SummationPlan& p, double h, std::string& kind) {
  const long M = p.terms;
  if (p.mode == Summation::Abel || p.mode == Summation::AbelRichardson) {
    kind = "abel_remainder";
    const double mk = std::abs(s(M + 1));
    return 2.0 * mk * std::pow(p.q, static_cast<double>(M)) / (1.0 - p.q);
  }
  const double r = s.order();
  if (s.atoms()) {
    kind = "atom_remainder";
    return 4.0 * std::abs(s(M + 1));
  }
  if (r < -1.0) {
    kind = "absolute";
    const double C = std::abs(s(M)) * std::pow(1.0 + M, -r);
    return 2.0 * C * std::pow(1.0 + M, r + 1.0) / (-r - 1.0);
  }
  kind = "dirichlet_first_cell";
  return 2.0 * std::abs(s(M + 1)) / std::abs(std::sin(0.5 * h));
}

}  // namespace detail

/// K_M(x_j) = c_h + 2 sum_{k=1}^{M} w_k m(k) cos(k x_j) with summation
/// weights w_k from the plan (w_k = 1 for direct truncation).
inline KernelTable build_kernel(const Symbol& s, const PeriodicGrid& grid, const KernelOptions& opt = {}) {
  const long M = opt.M > 0 ? opt.M : default_truncation(grid.n());
  if (M < grid.n()) throw DomainError("build_kernel: truncation M must be >= grid size");
  const auto plan = plan_summation(s, M, opt.summation, opt.abel_q);
  detail::SummationWeights weights(plan);
  auto A = detail::fold_coefficients([&](long k) { return weights.next(k) * s(k); }, plan.terms, grid.n());
  const auto S = detail::fold_to_grid(A);
  KernelTable kt;
  kt.grid = grid;
  kt.symbol = s;
  kt.truncation = plan.terms;
  kt.includes_zero_mode = !s.homogeneous();
  kt.summation = plan.mode;
  kt.abel_q = plan.mode == Summation::Direct ? 1.0 : plan.q;
  kt.degenerate = plan.degenerate;
  kt.tail_bound = detail::tail_estimate(s, plan, grid.spacing(), kt.tail_bound_kind);
  const double ch = s.zero_mode();
  kt.values.resize(static_cast<std::size_t>(grid.n()));
  for (int j = 0; j < grid.n(); ++j) kt.values[static_cast<std::size_t>(j)] = ch + 2.0 * S[static_cast<std::size_t>(j)].real();
  return kt;
}

/// K'(x_j) = -2 sum_k w_k k m(k) sin(k x_j), same summation plan as K.
inline std::vector<double> build_kernel_derivative(const Symbol& s, const PeriodicGrid& grid, const KernelOptions& opt = {}) {
  const long M = opt.M > 0 ? opt.M : default_truncation(grid.n());
  const auto plan = plan_summation(s, M, opt.summation, opt.abel_q);
  detail::SummationWeights weights(plan);
  auto B = detail::fold_coefficients([&](long k) { return weights.next(k) * static_cast<double>(k) * s(k); }, plan.terms, grid.n());
  const auto S = detail::fold_to_grid(B);
  std::vector<double> out(static_cast<std::size_t>(grid.n()));
  for (int j = 0; j < grid.n(); ++j) out[static_cast<std::size_t>(j)] = -2.0 * S[static_cast<std::size_t>(j)].imag();
  return out;
}

/// K at an arbitrary point by direct (weighted) series summation.
inline double kernel_value(const Symbol& s, double x, const KernelOptions& opt = {}) {
  const long M = opt.M > 0 ? opt.M : 100000;
  const auto plan = plan_summation(s, M, opt.summation, opt.abel_q);
  detail::SummationWeights weights(plan);
  detail::CompensatedSum acc;
  const cplx step = std::polar(1.0, x);
  cplx z(1.0, 0.0);
  for (long k = 1; k <= plan.terms; ++k) {
    if (k % 4096 == 1) z = std::polar(1.0, static_cast<double>(k) * x);
    else z *= step;
    acc.add(weights.next(k) * s(k) * z.real());
  }
  return s.zero_mode() + 2.0 * acc.value();
}

// ---------------------------------------------------------------------------
// Theta representation

/// Theta_3(z, u) = 1 + 2 sum_{k>=1} u^{k^2} cos(2 z k), truncated once
/// u^{k^2} < 1e-16.
inline double theta3(double z, double u) {
  if (!(u >= 0.0 && u < 1.0)) throw DomainError("theta3: nome u must lie in [0, 1)");
  if (u == 0.0) return 1.0;
  double s = 0.0;
  for (long k = 1;; ++k) {
    const double w = std::pow(u, static_cast<double>(k) * static_cast<double>(k));
    if (w < 1e-16) break;
    s += w * std::cos(2.0 * z * static_cast<double>(k));
  }
  return 1.0 + 2.0 * s;
}

/// K(x) = sum_j w_j Theta_3(x/2, t_j) for atoms with t_j < 1.
inline KernelTable kernel_from_atoms(const MeasureAtoms& a, const PeriodicGrid& grid) {
  if (a.has_unit_atom())
    throw DomainError("kernel_from_atoms: atom at t = 1 is the degenerate constant mode; handle it separately");
  KernelTable kt;
  kt.grid = grid;
  kt.symbol = from_atoms(a);
  kt.includes_zero_mode = true;
  kt.summation = Summation::Direct;
  kt.tail_bound = 0.0;
  kt.tail_bound_kind = "theta_truncation";
  kt.values.resize(static_cast<std::size_t>(grid.n()));
  for (int j = 0; j < grid.n(); ++j) {
    double v = 0.0;
    for (const auto& at : a.atoms())
      if (at.w != 0.0) v += at.w * theta3(0.5 * grid.x(j), at.t);
    kt.values[static_cast<std::size_t>(j)] = v;
  }
  return kt;
}

// ---------------------------------------------------------------------------
// Checks

inline double evenness_defect(const KernelTable& kt) {
  double d = 0.0;
  for (long j = 1; j < kt.n() / 2; ++j) d = std::max(d, std::abs(kt.at_offset(j) - kt.at_offset(-j)));
  return d;
}

struct MonotoneVerdict {
  bool passed = false;
  bool excluded = false;  ///< degenerate kernel, no verdict
  double worst_violation = -std::numeric_limits<double>::infinity();  ///< max K(x_{j+1}) - K(x_j)
  double worst_x = 0.0;
  double tolerance = 0.0;
  double delta = 0.0;
  int pairs_tested = 0;
};

/// Checks K(x_{j+1}) < K(x_j) + tol for grid points delta <= x_j < x_{j+1} <= pi,
/// tol = rel_tol * max|K| over the tested range.
inline MonotoneVerdict check_monotone_half_period(const KernelTable& kt, double delta = 0.0, double rel_tol = 1e-8) {
  MonotoneVerdict v;
  if (delta <= 0.0) delta = 4.0 * kt.grid.spacing();
  v.delta = delta;
  if (kt.degenerate) {
    v.excluded = true;
    return v;
  }
  const int n = kt.n();
  const double h = kt.grid.spacing();
  const long d0 = static_cast<long>(std::ceil(delta / h - 1e-9));
  double kmax = 0.0;
  for (long d = d0; d <= n / 2; ++d) kmax = std::max(kmax, std::abs(kt.at_offset(d)));
  v.tolerance = rel_tol * kmax;
  for (long d = d0; d < n / 2; ++d) {
    const double jump = kt.at_offset(d + 1) - kt.at_offset(d);
    ++v.pairs_tested;
    if (jump > v.worst_violation) {
      v.worst_violation = jump;
      v.worst_x = (d + 1) * h;
    }
  }
  v.passed = v.worst_violation < v.tolerance;
  return v;
}

struct OriginReport {
  std::vector<long> truncations;
  std::vector<double> sup_sinK;  ///< per truncation
  double sup_spread = 0.0;       ///< max/min - 1 over truncations
  bool bounded_stable = false;
  std::vector<double> x_samples;
  std::vector<double> xK;  ///< |x K(x)| at the samples
  bool strictly_decreasing = false;
  double fitted_exponent = 0.0;
  double fitted_limit = 0.0;
  double origin_tolerance = 0.0;
  bool passed = false;
};

/// (i) sup_x |sin(x) K_M(x)| on the grid is stable (within 10%) across the
/// truncations; (ii) |x K(x)| at decreasing samples decreases toward 0,
/// with the limit read off a power-law fit a x^p.
inline OriginReport check_origin_behaviour(const Symbol& s, const std::vector<long>& truncations,
                                           const std::vector<double>& x_samples, int n = 1024,
                                           const KernelOptions& sample_opt = {}) {
  OriginReport rep;
  rep.truncations = truncations;
  rep.x_samples = x_samples;
  const PeriodicGrid grid(n);
  for (long M : truncations) {
    KernelOptions o;
    o.M = std::max<long>(M, n);
    o.summation = Summation::Direct;
    const auto plan = plan_summation(s, o.M, Summation::Direct, 1.0);
    detail::SummationWeights w(plan);
    auto A = detail::fold_coefficients([&](long k) { return w.next(k) * s(k); }, plan.terms, n);
    const auto S = detail::fold_to_grid(A);
    double sup = 0.0;
    for (int j = 0; j < n; ++j) {
      const double K = s.zero_mode() + 2.0 * S[static_cast<std::size_t>(j)].real();
      sup = std::max(sup, std::abs(std::sin(grid.x(j)) * K));
    }
    rep.sup_sinK.push_back(sup);
  }
  if (!rep.sup_sinK.empty()) {
    const auto [lo, hi] = std::minmax_element(rep.sup_sinK.begin(), rep.sup_sinK.end());
    rep.sup_spread = *hi / *lo - 1.0;
    rep.bounded_stable = *hi <= 1.1 * *lo;
  }
  for (double x : x_samples) rep.xK.push_back(std::abs(x * kernel_value(s, x, sample_opt)));
  rep.strictly_decreasing = rep.xK.size() >= 2;
  for (std::size_t i = 1; i < rep.xK.size(); ++i)
    rep.strictly_decreasing = rep.strictly_decreasing && rep.xK[i] < rep.xK[i - 1];
  double vmax = 0.0;
  for (double v : rep.xK) vmax = std::max(vmax, v);
  rep.origin_tolerance = 0.05 * vmax;
  // Power-law fit |x K(x)| ~ a x^p; a positive exponent extrapolates to 0.
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < rep.xK.size(); ++i)
    if (rep.xK[i] > 0.0) {
      lx.push_back(std::log(rep.x_samples[i]));
      ly.push_back(std::log(rep.xK[i]));
    }
  if (lx.size() >= 2) rep.fitted_exponent = least_squares_line(lx, ly).slope;
  rep.fitted_limit = rep.fitted_exponent > 0.0 ? 0.0 : (rep.xK.empty() ? 0.0 : rep.xK.back());
  rep.passed = rep.bounded_stable && rep.strictly_decreasing && std::abs(rep.fitted_limit) <= rep.origin_tolerance;
  return rep;
}

// ---------------------------------------------------------------------------
// Applying L

inline SpectralField apply_L(const Symbol& s, const SpectralField& f) {
  if (s.homogeneous() && std::abs(f.mean()) > 1e-12 * std::max(1.0, f.max_abs()))
    throw DomainError("apply_L: homogeneous symbol requires a zero-mean field");
  return apply_multiplier(f, [&](int k) { return (k == 0 && s.homogeneous()) ? 0.0 : s(k); });
}

/// Kernel table set up for quadrature convolution on a refined grid.
struct QuadratureKernel {
  KernelTable table;  ///< on the fine grid
  int refine = 16;
};

/// Direct truncation at M rounded so that M = N/2 (mod N) on the fine grid
/// N = refine * n; the aliased partners of every retained mode are then
/// summed symmetrically.
inline QuadratureKernel make_quadrature_kernel(const Symbol& s, int n, long M, int refine = 16) {
  const int N = refine * n;
  const long Meff = std::max<long>(1, M / N) * N + N / 2;
  KernelOptions o;
  o.M = Meff;
  o.summation = Summation::Direct;
  QuadratureKernel qk;
  qk.refine = refine;
  if (s.atoms() && s.atoms()->has_unit_atom())
    throw DomainError("quadrature kernel: degenerate symbol with unit atom");
  const auto plan = plan_summation(s, Meff, Summation::Direct, 1.0);
  detail::SummationWeights w(plan);
  auto A = detail::fold_coefficients([&](long k) { return w.next(k) * s(k); }, plan.terms, N);
  const auto S = detail::fold_to_grid(A);
  qk.table.grid = PeriodicGrid(N);
  qk.table.symbol = s;
  qk.table.truncation = plan.terms;
  qk.table.includes_zero_mode = !s.homogeneous();
  qk.table.summation = Summation::Direct;
  qk.table.tail_bound = detail::tail_estimate(s, plan, qk.table.grid.spacing(), qk.table.tail_bound_kind);
  qk.table.values.resize(static_cast<std::size_t>(N));
  for (int j = 0; j < N; ++j) qk.table.values[static_cast<std::size_t>(j)] = s.zero_mode() + 2.0 * S[static_cast<std::size_t>(j)].real();
  return qk;
}

/// Quadrature value of L f at fine grid index I for f given on the fine grid.
inline double convolve_quadrature_at(const QuadratureKernel& qk, const SpectralField& fine, int I) {
  const int N = qk.table.n();
  if (fine.size() != N) throw DomainError("convolve_quadrature_at: field is not on the kernel grid");
  const double ch = qk.table.includes_zero_mode ? qk.table.symbol.zero_mode() : 0.0;
  const double fi = fine[I];
  detail::CompensatedSum acc;
  for (int J = 0; J < N; ++J) {
    if (J == I) continue;
    acc.add(qk.table.at_offset(I - J) * (fine[J] - fi));
  }
  return acc.value() / N + ch * fi;
}

/// L f at the coarse grid points by trapezoidal quadrature of
/// (1/2pi) int K(x_i - y) [f(y) - f(x_i)] dy + c_h f(x_i) on the fine grid.
/// The singular sample K(0) is multiplied by zero and never contributes.
/// The Nyquist mode of f is dropped first, matching apply_L.
inline std::vector<double> convolve_quadrature(const QuadratureKernel& qk, const SpectralField& f) {
  const int n = f.size();
  const int N = qk.table.n();
  if (N != qk.refine * n) throw DomainError("convolve_quadrature: kernel grid does not match field refinement");
  const auto fine = resample(apply_multiplier(f, [](int) { return 1.0; }), N);
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = convolve_quadrature_at(qk, fine, i * qk.refine);
  return out;
}

// ---------------------------------------------------------------------------
// Touching-lemma kernel difference

/// Reflection axis lambda = -pi + pi m / n (grid points and midpoints).
inline double half_grid_axis(int m, int n) { return -kPi + kPi * m / n; }

/// True when x_j lies in the open interval (lambda, lambda + pi) mod 2pi,
/// lambda = half_grid_axis(m, n).
inline bool in_open_half_period(int j, int m, int n) {
  const int t = (((2 * j - m) % (2 * n)) + 2 * n) % (2 * n);
  return t > 0 && t < n;
}

struct GpProfile {
  std::vector<int> indices;  ///< grid indices y_j in (lambda, lambda + pi)
  std::vector<double> values;
  double min_value = std::numeric_limits<double>::infinity();
  double min_y = 0.0;
  double at_lambda = 0.0;     ///< G_p(lambda) (when lambda is a grid point)
  double at_lambda_pi = 0.0;  ///< G_p(lambda + pi)
};

/// G_p(y) = K(xbar - y) - K(xbar + y - 2 lambda) on the grid, for
/// lambda = half_grid_axis(m) and xbar = x_i.
inline GpProfile gp_profile(const KernelTable& kt, int m, int i) {
  const int n = kt.n();
  GpProfile g;
  for (int j = 0; j < n; ++j) {
    if (!in_open_half_period(j, m, n)) continue;
    const double v = kt.at_offset(static_cast<long>(i) - j) - kt.at_offset(static_cast<long>(i) + j - m);
    g.indices.push_back(j);
    g.values.push_back(v);
    if (v < g.min_value) {
      g.min_value = v;
      g.min_y = kt.grid.x(j);
    }
  }
  if (m % 2 == 0) {
    const int jl = m / 2;
    const int jp = (m / 2 + n / 2) % n;
    g.at_lambda = kt.at_offset(static_cast<long>(i) - jl) - kt.at_offset(static_cast<long>(i) + jl - m);
    g.at_lambda_pi = kt.at_offset(static_cast<long>(i) - jp) - kt.at_offset(static_cast<long>(i) + jp - m);
  }
  return g;
}

inline nlohmann::json to_json(const MonotoneVerdict& v) {
  return {{"passed", v.passed},
          {"excluded", v.excluded},
          {"worst_violation", std::isfinite(v.worst_violation) ? v.worst_violation : 0.0},
          {"worst_x", v.worst_x},
          {"tolerance", v.tolerance},
          {"delta", v.delta},
          {"pairs_tested", v.pairs_tested}};
}

inline nlohmann::json to_json(const OriginReport& r) {
  return {{"truncations", r.truncations},
          {"sup_sinK", r.sup_sinK},
          {"sup_spread", r.sup_spread},
          {"bounded_stable", r.bounded_stable},
          {"x_samples", r.x_samples},
          {"xK", r.xK},
          {"strictly_decreasing", r.strictly_decreasing},
          {"fitted_exponent", r.fitted_exponent},
          {"fitted_limit", r.fitted_limit},
          {"origin_tolerance", r.origin_tolerance},
          {"passed", r.passed}};
}

inline nlohmann::json kernel_metadata(const KernelTable& kt) {
  return {{"n", kt.n()},
          {"truncation", kt.truncation},
          {"summation", to_string(kt.summation)},
          {"abel_q", kt.abel_q},
          {"tail_bound", kt.tail_bound},
          {"tail_bound_kind", kt.tail_bound_kind},
          {"includes_zero_mode", kt.includes_zero_mode},
          {"degenerate", kt.degenerate},
          {"symbol", kt.symbol.config()}};
}

inline std::string kernel_csv(const KernelTable& kt) {
  std::ostringstream os;
  os.precision(17);
  os << "x,K\n";
  for (int j = 0; j < kt.n(); ++j) os << kt.grid.x(j) << ',' << kt.values[static_cast<std::size_t>(j)] << '\n';
  return os.str();
}

}  // namespace nwl

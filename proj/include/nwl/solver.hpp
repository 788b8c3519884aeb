#pragma once

// Periodic traveling waves of -c phi + L phi + phi^2 = B: residuals, the
// Galilean gauge, the smoothing fixed-point iteration, bordered Newton,
// height continuation and the crest Hoelder fit.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nwl/errors.hpp"
#include "nwl/kernel.hpp"
#include "nwl/spectral.hpp"
#include "nwl/symbols.hpp"

namespace nwl {

struct WaveProfile {
  SpectralField phi;
  double c = 0.0;
  double b = 0.0;
  Symbol symbol;
  double residual_norm = 0.0;
  int iterations = 0;

  WaveProfile(SpectralField phi_, double c_, double b_, Symbol s)
      : phi(std::move(phi_)), c(c_), b(b_), symbol(std::move(s)) {}

  double height() const { return phi[phi.grid().origin_index()]; }
  /// max phi / (c/2)
  double height_ratio() const { return phi.max() / (0.5 * c); }
};

/// L phi by the multiplier; the k = 0 mode is dropped for homogeneous symbols.
inline SpectralField apply_L_unchecked(const Symbol& s, const SpectralField& f) {
  return apply_multiplier(f, [&](int k) { return (k == 0 && s.homogeneous()) ? 0.0 : s(k); });
}

/// -c phi + L phi + phi^2 - b, with phi^2 dealiased.
inline SpectralField residual(const WaveProfile& p) {
  const auto Lphi = apply_L_unchecked(p.symbol, p.phi);
  const auto sq = multiply_dealiased(p.phi, p.phi);
  std::vector<double> r(static_cast<std::size_t>(p.phi.size()));
  for (int j = 0; j < p.phi.size(); ++j) r[static_cast<std::size_t>(j)] = -p.c * p.phi[j] + Lphi[j] + sq[j] - p.b;
  return SpectralField(p.phi.grid(), std::move(r));
}

inline double residual_norm(const WaveProfile& p) { return residual(p).max_abs(); }

inline WaveProfile with_residual(WaveProfile p) {
  p.residual_norm = residual_norm(p);
  return p;
}

/// (phi, c, B) -> (phi + g, c + 2g, B + g (m(0) - c - g)).
inline WaveProfile galilean_shift(const WaveProfile& p, double g) {
  if (p.symbol.homogeneous()) throw DomainError("galilean_shift: homogeneous symbol (the shift changes the mean)");
  WaveProfile q(p.phi + g, p.c + 2.0 * g, p.b + g * (p.symbol(0) - p.c - g), p.symbol);
  return with_residual(std::move(q));
}

// ---------------------------------------------------------------------------
// Fixed-point iteration

class FixedPointFailure : public IterationFailure {
 public:
  FixedPointFailure(const std::string& what, int iterations, double last_update, std::vector<double> last)
      : IterationFailure(what, iterations, last_update), last_iterate(std::move(last)) {}
  std::vector<double> last_iterate;
};

struct FixedPointOptions {
  double tol = 1e-12;
  int max_iter = 20000;
  double safeguard = 1e-12;  ///< radicand floor relative to c^2
};

/// phi <- c/2 - sqrt(B + c^2/4 - L phi); for homogeneous symbols the mean is
/// projected out and B = mean(phi^2) refreshed every step.
inline WaveProfile fixed_point_solve(const Symbol& s, double c, const SpectralField& init, const FixedPointOptions& opt = {}) {
  if (!(c > 0.0)) throw DomainError("fixed_point_solve: speed must be positive");
  const bool hom = s.homogeneous();
  auto project = [&](SpectralField f) { return hom ? f + (-f.mean()) : f; };
  SpectralField phi = project(init);
  double B = hom ? multiply_dealiased(phi, phi).mean() : 0.0;
  double update = 0.0;
  const int n = phi.size();
  for (int it = 1; it <= opt.max_iter; ++it) {
    const auto Lphi = apply_L_unchecked(s, phi);
    std::vector<double> next(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
      const double rad = B + 0.25 * c * c - Lphi[j];
      if (rad <= opt.safeguard * c * c)
        throw HighestWaveApproach("fixed_point_solve: radicand reached the highest-wave bound", phi.grid().x(j), rad);
      next[static_cast<std::size_t>(j)] = 0.5 * c - std::sqrt(rad);
    }
    SpectralField nf = project(SpectralField(phi.grid(), std::move(next)));
    update = max_abs_difference(nf, phi);
    phi = std::move(nf);
    if (hom) B = multiply_dealiased(phi, phi).mean();
    if (!std::isfinite(update)) break;
    if (update < opt.tol) {
      WaveProfile p(phi, c, B, s);
      p.iterations = it;
      return with_residual(std::move(p));
    }
  }
  throw FixedPointFailure("fixed_point_solve: no convergence", opt.max_iter, update, phi.values());
}

// ---------------------------------------------------------------------------
// Newton

struct Constraint {
  enum class Kind { FixSpeed, FixHeight } kind = Kind::FixSpeed;
  double height = 0.0;
  static Constraint fix_speed() { return {}; }
  static Constraint fix_height(double h) { return {Kind::FixHeight, h}; }
};

struct NewtonOptions {
  double tol = 1e-11;
  int max_iter = 25;
  double fold_rcond = 1e-14;
};

namespace detail {

/// Circulant matrix of a multiplier on the grid: A_ij = (T e_0)(x_{i-j}).
template <class Mult>
Eigen::MatrixXd circulant_matrix(const PeriodicGrid& g, Mult&& mult) {
  const int n = g.n();
  std::vector<double> e0(static_cast<std::size_t>(n), 0.0);
  e0[0] = 1.0;
  const auto col = apply_multiplier(SpectralField(g, e0), mult);
  Eigen::MatrixXd A(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) A(i, j) = col[((i - j) % n + n) % n];
  return A;
}

inline Eigen::MatrixXd derivative_matrix(const PeriodicGrid& g) {
  const int n = g.n();
  std::vector<double> e0(static_cast<std::size_t>(n), 0.0);
  e0[0] = 1.0;
  const auto col = derivative(SpectralField(g, e0));
  Eigen::MatrixXd A(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) A(i, j) = col[((i - j) % n + n) % n];
  return A;
}

/// Columns P(phi e_j) of the linearized dealiased square (without the 2).
inline Eigen::MatrixXd dealiased_product_matrix(const SpectralField& phi) {
  const int n = phi.size();
  Eigen::MatrixXd Q(n, n);
  std::vector<double> e(static_cast<std::size_t>(n), 0.0);
  for (int j = 0; j < n; ++j) {
    e[static_cast<std::size_t>(j)] = 1.0;
    const auto col = multiply_dealiased(phi, SpectralField(phi.grid(), e));
    e[static_cast<std::size_t>(j)] = 0.0;
    for (int i = 0; i < n; ++i) Q(i, j) = col[i];
  }
  return Q;
}

}  // namespace detail

/// Bordered Newton on grid values. Unknowns: phi, a translation multiplier
/// s (paired with the phase condition phi'(0) = 0), c under fix_height, and
/// B for homogeneous symbols (paired with mean(phi) = 0).
inline WaveProfile newton_solve(const WaveProfile& p0, const Constraint& con, const NewtonOptions& opt = {}) {
  const Symbol& s = p0.symbol;
  const PeriodicGrid g = p0.phi.grid();
  const int n = g.n();
  const int o = g.origin_index();
  const bool hom = s.homogeneous();
  const bool fix_h = con.kind == Constraint::Kind::FixHeight;

  const Eigen::MatrixXd Lm = detail::circulant_matrix(g, [&](int k) { return (k == 0 && hom) ? 0.0 : s(k); });
  const Eigen::MatrixXd Dm = detail::derivative_matrix(g);

  Eigen::VectorXd phi = Eigen::Map<const Eigen::VectorXd>(p0.phi.values().data(), n);
  double c = p0.c;
  double B = p0.b;
  double sh = 0.0;
  const Eigen::VectorXd dphi0 = Dm * phi;
  const bool phase = dphi0.cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, phi.cwiseAbs().maxCoeff()) ||
                     fix_h;  // height pinning needs a gauge even for flat starts

  const int i_s = n;
  const int i_c = n + (phase ? 1 : 0);
  const int i_B = i_c + (fix_h ? 1 : 0);
  const int nu = i_B + (hom ? 1 : 0);

  auto to_field = [&](const Eigen::VectorXd& v) {
    return SpectralField(g, std::vector<double>(v.data(), v.data() + n));
  };

  double last = std::numeric_limits<double>::infinity();
  double first = -1.0;
  for (int it = 0; it <= opt.max_iter; ++it) {
    const SpectralField f = to_field(phi);
    const auto sq = multiply_dealiased(f, f);
    const Eigen::VectorXd Dphi = Dm * phi;
    Eigen::VectorXd F(nu);
    for (int i = 0; i < n; ++i) F(i) = -c * phi(i) + Lm.row(i).dot(phi) + sq[i] - B + sh * Dphi(i);
    if (phase) F(i_s) = Dphi(o);
    if (fix_h) F(i_c) = phi(o) - con.height;
    if (hom) F(i_B) = phi.mean();
    const double fn = F.cwiseAbs().maxCoeff();
    if (!std::isfinite(fn)) throw IterationFailure("newton_solve: non-finite residual", it, fn);
    if (first < 0.0) first = fn;
    if (fn > 1e6 * std::max(first, 1e-8)) throw IterationFailure("newton_solve: diverging", it, fn);
    last = fn;
    if (fn <= opt.tol) {
      WaveProfile out(f, c, B, s);
      out.iterations = it;
      out = with_residual(std::move(out));
      if (out.residual_norm <= opt.tol) return out;
    }
    if (it == opt.max_iter) break;

    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(nu, nu);
    J.topLeftCorner(n, n) = Lm + 2.0 * detail::dealiased_product_matrix(f) + sh * Dm;
    for (int i = 0; i < n; ++i) J(i, i) -= c;
    if (phase) {
      J.block(0, i_s, n, 1) = Dphi;
      J.block(i_s, 0, 1, n) = Dm.row(o);
    }
    if (fix_h) {
      J.block(0, i_c, n, 1) = -phi;
      J(i_c, o) = 1.0;
    }
    if (hom) {
      J.block(0, i_B, n, 1).setConstant(-1.0);
      J.block(i_B, 0, 1, n).setConstant(1.0 / n);
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(J);
    const double rc = lu.rcond();
    if (!(rc >= opt.fold_rcond)) throw FoldDetected("newton_solve: singular Jacobian", rc);
    const Eigen::VectorXd dx = lu.solve(F);
    phi -= dx.head(n);
    if (phase) sh -= dx(i_s);
    if (fix_h) c -= dx(i_c);
    if (hom) B -= dx(i_B);
  }
  throw IterationFailure("newton_solve: no convergence", opt.max_iter, last);
}

// ---------------------------------------------------------------------------
// Continuation

struct SmallAmplitude {
  SpectralField init;
  double c0;
};

/// eps cos(x) at the bifurcation speed c0 = m(1).
inline SmallAmplitude small_amplitude_init(const Symbol& s, double eps, const PeriodicGrid& grid) {
  const double c0 = s(1);
  if (!(eps > 0.0 && eps < 0.1 * c0)) throw DomainError("small_amplitude_init: eps must lie in (0, 0.1 m(1))");
  return {SpectralField::from_function(grid, [eps](double x) { return eps * std::cos(x); }), c0};
}

inline WaveProfile small_amplitude_profile(const Symbol& s, double eps, const PeriodicGrid& grid) {
  auto sa = small_amplitude_init(s, eps, grid);
  const double b = s.homogeneous() ? multiply_dealiased(sa.init, sa.init).mean() : 0.0;
  return with_residual(WaveProfile(sa.init, sa.c0, b, s));
}

enum class Termination { TargetHeight, StepFailure, HighestWaveProximity };

inline const char* to_string(Termination t) {
  switch (t) {
    case Termination::TargetHeight: return "target_height";
    case Termination::StepFailure: return "step_failure";
    case Termination::HighestWaveProximity: return "highest_wave_proximity";
  }
  return "unknown";
}

struct Branch {
  std::vector<WaveProfile> profiles;
  std::vector<double> heights;
  std::vector<double> speeds;
  Termination terminated_reason = Termination::StepFailure;
  int attempted_steps = 0;
  int rejected_steps = 0;
};

struct BranchOptions {
  double theta = 0.9;     ///< target max phi / (c/2)
  double eps = 0.01;      ///< starting amplitude
  int min_steps = 25;     ///< caps the height-ratio increment at theta / min_steps
  double min_step = 1e-7; ///< smallest height increment before giving up
  int max_steps = 2000;
  double proximity = 0.98;  ///< failures beyond this ratio count as highest-wave proximity
  NewtonOptions newton{};
};

/// Height continuation from the small-amplitude wave (or from the last two
/// profiles of `seed` when given) with secant prediction.
inline Branch continue_branch(const Symbol& s, const PeriodicGrid& grid, const BranchOptions& opt = {},
                              const std::vector<WaveProfile>& seed = {}) {
  if (!(opt.theta > 0.0 && opt.theta < 1.0)) throw DomainError("continue_branch: theta must lie in (0,1)");
  Branch br;
  auto accept = [&](WaveProfile p) {
    br.heights.push_back(p.height());
    br.speeds.push_back(p.c);
    br.profiles.push_back(std::move(p));
  };
  if (seed.empty()) {
    auto p0 = small_amplitude_profile(s, opt.eps, grid);
    accept(newton_solve(p0, Constraint::fix_height(opt.eps), opt.newton));
  } else {
    for (const auto& p : seed) {
      if (!(p.phi.grid() == grid)) {
        WaveProfile q(resample(p.phi, grid.n()), p.c, p.b, p.symbol);
        accept(newton_solve(q, Constraint::fix_height(q.height()), opt.newton));
      } else {
        accept(p);
      }
    }
  }
  const double max_ratio_step = opt.theta / opt.min_steps;
  double dh = 0.5 * max_ratio_step * 0.5 * br.speeds.back();
  int halvings = 0;
  while (br.profiles.back().height_ratio() < opt.theta) {
    if (br.attempted_steps >= opt.max_steps) {
      br.terminated_reason = Termination::StepFailure;
      return br;
    }
    ++br.attempted_steps;
    const auto& cur = br.profiles.back();
    dh = std::min(dh, max_ratio_step * 0.5 * cur.c);
    // Land just past the target instead of overshooting by a full step.
    const double to_target = opt.theta * 0.5 * cur.c - cur.height();
    const double land = to_target + 1e-3 * max_ratio_step * 0.5 * cur.c;
    const double h_step = (to_target > 0.0 && land < dh) ? land : dh;
    const double h_new = cur.height() + h_step;
    // Secant predictor in the height parameter.
    SpectralField guess = cur.phi;
    double c_guess = cur.c, b_guess = cur.b;
    if (br.profiles.size() >= 2) {
      const auto& prev = br.profiles[br.profiles.size() - 2];
      const double a = h_step / (cur.height() - prev.height());
      guess = cur.phi + (cur.phi - prev.phi) * a;
      c_guess = cur.c + a * (cur.c - prev.c);
      b_guess = cur.b + a * (cur.b - prev.b);
    } else {
      guess = cur.phi * (h_new / cur.height());
    }
    bool ok = false;
    try {
      WaveProfile p = newton_solve(WaveProfile(guess, c_guess, b_guess, s), Constraint::fix_height(h_new), opt.newton);
      const double ratio = p.height_ratio();
      const bool crest_ok = p.phi.argmax() == grid.origin_index();
      if (ratio < 1.0 && crest_ok && ratio - cur.height_ratio() <= 1.5 * max_ratio_step && p.height() > cur.height()) {
        const bool fast = p.iterations <= 4;
        accept(std::move(p));
        ok = true;
        halvings = 0;
        if (fast) dh *= 1.5;
      }
    } catch (const Error&) {
    }
    if (!ok) {
      ++br.rejected_steps;
      dh *= 0.5;
      if (dh < opt.min_step) {
        if (++halvings >= 3) {
          br.terminated_reason = br.profiles.back().height_ratio() >= opt.proximity ? Termination::HighestWaveProximity
                                                                                     : Termination::StepFailure;
          return br;
        }
      }
    }
  }
  br.terminated_reason = Termination::TargetHeight;
  return br;
}

// ---------------------------------------------------------------------------
// Crest regularity

enum class HolderReference { HalfSpeed, CrestValue };

struct HolderFit {
  double alpha = 0.0;
  double fit_rms = 0.0;
  int points = 0;
  double x_lo = 0.0;
  double x_hi = 0.0;
  HolderReference reference = HolderReference::HalfSpeed;
};

/// Slope of log(ref - phi(x)) against log|x| near the crest, ref = c/2 or
/// phi(0), over grid points with x in [4h, 0.3] on both sides.
inline HolderFit holder_exponent_at_crest(const WaveProfile& p, HolderReference ref = HolderReference::HalfSpeed,
                                          double x_hi = 0.3) {
  const int n = p.phi.size();
  const double h = p.phi.grid().spacing();
  if (ref == HolderReference::HalfSpeed && 0.5 * p.c - p.phi.max() > 0.02 * p.c)
    throw DomainError("holder_exponent_at_crest: profile is not near the highest wave");
  // Crest to the origin by an exact index roll.
  const int shift = p.phi.grid().origin_index() - p.phi.argmax();
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) v[static_cast<std::size_t>(((j + shift) % n + n) % n)] = p.phi[j];
  const int o = n / 2;
  const double top = ref == HolderReference::HalfSpeed ? 0.5 * p.c : v[static_cast<std::size_t>(o)];
  HolderFit fit;
  fit.reference = ref;
  fit.x_lo = 4.0 * h;
  fit.x_hi = x_hi;
  std::vector<double> lx, ly;
  for (int d = 1; d < n / 2; ++d) {
    const double x = d * h;
    if (x < fit.x_lo - 1e-12 || x > x_hi + 1e-12) continue;
    for (int side : {-1, 1}) {
      const double gap = top - v[static_cast<std::size_t>(o + side * d)];
      if (gap <= 0.0) continue;
      lx.push_back(std::log(x));
      ly.push_back(std::log(gap));
    }
  }
  fit.points = static_cast<int>(lx.size());
  if (fit.points < 8) throw CapabilityError("holder_exponent_at_crest: fewer than 8 fit points; refine the grid");
  const auto line = least_squares_line(lx, ly);
  fit.alpha = line.slope;
  fit.fit_rms = line.rms;
  return fit;
}

// ---------------------------------------------------------------------------
// Independent residual route

struct TwoRouteResidual {
  double residual_multiplier = 0.0;
  double residual_quadrature = 0.0;
  double route_difference = 0.0;  ///< max |L phi (multiplier) - L phi (quadrature)|
};

/// Residual with L phi computed by trapezoidal kernel quadrature.
inline TwoRouteResidual residual_two_route(const WaveProfile& p, const QuadratureKernel& qk) {
  TwoRouteResidual out;
  const auto Lm = apply_L_unchecked(p.symbol, p.phi);
  const auto Lq = convolve_quadrature(qk, p.phi);
  const auto sq = multiply_dealiased(p.phi, p.phi);
  for (int j = 0; j < p.phi.size(); ++j) {
    const double common = -p.c * p.phi[j] + sq[j] - p.b;
    out.residual_multiplier = std::max(out.residual_multiplier, std::abs(common + Lm[j]));
    out.residual_quadrature = std::max(out.residual_quadrature, std::abs(common + Lq[static_cast<std::size_t>(j)]));
    out.route_difference = std::max(out.route_difference, std::abs(Lm[j] - Lq[static_cast<std::size_t>(j)]));
  }
  return out;
}

inline nlohmann::json profile_summary(const WaveProfile& p) {
  return {{"c", p.c},
          {"b", p.b},
          {"height", p.height()},
          {"max", p.phi.max()},
          {"min", p.phi.min()},
          {"mean", p.phi.mean()},
          {"height_ratio", p.height_ratio()},
          {"residual_norm", p.residual_norm},
          {"iterations", p.iterations},
          {"n", p.phi.size()}};
}

inline std::string branch_csv(const Branch& br) {
  std::ostringstream os;
  os.precision(17);
  os << "step,height,c,residual\n";
  for (std::size_t i = 0; i < br.profiles.size(); ++i)
    os << i << ',' << br.heights[i] << ',' << br.speeds[i] << ',' << br.profiles[i].residual_norm << '\n';
  return os.str();
}

}  // namespace nwl

#pragma once

// Fourier multiplier symbols m(k), their forward differences, and the
// numerical certification of complete monotonicity and symbol order.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "nwl/errors.hpp"

namespace nwl {

enum class SymbolKind { Homogeneous, Inhomogeneous, AtomSynthesized };

inline const char* to_string(SymbolKind k) {
  switch (k) {
    case SymbolKind::Homogeneous: return "homogeneous";
    case SymbolKind::Inhomogeneous: return "inhomogeneous";
    case SymbolKind::AtomSynthesized: return "atom_synthesized";
  }
  return "unknown";
}

struct Atom {
  double t;  ///< support point in [0, 1]
  double w;  ///< nonnegative weight
};

/// Purely atomic nondecreasing measure on [0, 1].
class MeasureAtoms {
 public:
  explicit MeasureAtoms(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
    if (atoms_.empty()) throw DomainError("MeasureAtoms: atom list is empty");
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
      const auto& a = atoms_[i];
      if (!(a.t >= 0.0 && a.t <= 1.0)) throw DomainError("MeasureAtoms: t outside [0,1]");
      if (!(a.w >= 0.0) || !std::isfinite(a.w)) throw DomainError("MeasureAtoms: negative weight");
      for (std::size_t j = 0; j < i; ++j)
        if (atoms_[j].t == a.t) throw DomainError("MeasureAtoms: duplicate support point");
    }
  }

  const std::vector<Atom>& atoms() const noexcept { return atoms_; }
  bool has_unit_atom() const noexcept {
    return std::any_of(atoms_.begin(), atoms_.end(), [](const Atom& a) { return a.t == 1.0 && a.w > 0.0; });
  }
  double max_interior_t() const noexcept {
    double t = 0.0;
    for (const auto& a : atoms_)
      if (a.t < 1.0 && a.w > 0.0) t = std::max(t, a.t);
    return t;
  }

  /// sum_j w_j t_j^e with the convention t^0 = 1 (also for t = 0).
  double moment(double e) const noexcept {
    double s = 0.0;
    for (const auto& a : atoms_) {
      if (a.w == 0.0) continue;
      if (e == 0.0) s += a.w;
      else if (a.t > 0.0) s += a.w * std::pow(a.t, e);
    }
    return s;
  }

 private:
  std::vector<Atom> atoms_;
};

/// An even, real Fourier multiplier symbol. Immutable value type; copies
/// share the evaluation closure.
class Symbol {
 public:
  using Function = std::function<double(double)>;

  Symbol(SymbolKind kind, double order, std::string label, Function fn, bool real_extension,
         nlohmann::json config, std::optional<MeasureAtoms> atoms = std::nullopt)
      : kind_(kind),
        order_(order),
        label_(std::move(label)),
        fn_(std::move(fn)),
        real_extension_(real_extension),
        config_(std::move(config)),
        atoms_(std::move(atoms)) {}

  SymbolKind kind() const noexcept { return kind_; }
  bool homogeneous() const noexcept { return kind_ == SymbolKind::Homogeneous; }
  double order() const noexcept { return order_; }
  const std::string& label() const noexcept { return label_; }
  const nlohmann::json& config() const noexcept { return config_; }
  const std::optional<MeasureAtoms>& atoms() const noexcept { return atoms_; }
  bool has_real_extension() const noexcept { return real_extension_; }

  /// m(k) with the even extension m(-k) = m(k).
  double operator()(long k) const {
    if (k == 0 && homogeneous())
      throw DomainError("symbol '" + label_ + "': m(0) is undefined for a homogeneous symbol");
    return fn_(static_cast<double>(k < 0 ? -k : k));
  }

  /// Real-argument extension m(|xi|).
  double at(double xi) const {
    if (!real_extension_) throw CapabilityError("symbol '" + label_ + "' has no real-argument extension");
    xi = std::abs(xi);
    if (xi == 0.0 && homogeneous())
      throw DomainError("symbol '" + label_ + "': m(0) is undefined for a homogeneous symbol");
    return fn_(xi);
  }

  /// Constant mode of the kernel: m(0) for inhomogeneous symbols, 0 otherwise.
  double zero_mode() const { return homogeneous() ? 0.0 : (*this)(0); }

 private:
  SymbolKind kind_;
  double order_;
  std::string label_;
  Function fn_;
  bool real_extension_;
  nlohmann::json config_;
  std::optional<MeasureAtoms> atoms_;
};

inline double eval_symbol(const Symbol& s, long k) { return s(k); }

enum class OrderPolicy { RequireNegative, AllowNonnegative };

/// Fractional KdV symbol |k|^r (homogeneous). r = -1 is Burgers-Hilbert,
/// r = -2 reduced Ostrovsky.
inline Symbol fkdv(double r, OrderPolicy policy = OrderPolicy::RequireNegative) {
  if (policy == OrderPolicy::RequireNegative && !(r < 0.0))
    throw DomainError("fkdv: order r must be negative");
  nlohmann::json cfg = {{"kind", "fkdv"}, {"r", r}};
  return Symbol(SymbolKind::Homogeneous, r, "fkdv(" + nlohmann::json(r).dump() + ")",
                [r](double xi) { return std::pow(xi, r); }, true, std::move(cfg));
}

/// Whitham symbol sqrt(tanh(k)/k), m(0) = 1.
inline Symbol whitham() {
  auto fn = [](double xi) {
    if (xi < 1e-4) return 1.0 - xi * xi / 6.0;  // sqrt(1 - xi^2/3 + ...)
    if (xi > 20.0) return 1.0 / std::sqrt(xi);
    return std::sqrt(std::tanh(xi) / xi);
  };
  return Symbol(SymbolKind::Inhomogeneous, -0.5, "whitham", fn, true, {{"kind", "whitham"}});
}

/// Bessel-type symbol (1 + k^2)^(r/2).
inline Symbol bessel(double r, OrderPolicy policy = OrderPolicy::RequireNegative) {
  if (policy == OrderPolicy::RequireNegative && !(r < 0.0))
    throw DomainError("bessel: order r must be negative");
  nlohmann::json cfg = {{"kind", "bessel"}, {"r", r}};
  if (policy == OrderPolicy::AllowNonnegative) cfg["allow_nonnegative_order"] = true;
  return Symbol(SymbolKind::Inhomogeneous, r, "bessel(" + nlohmann::json(r).dump() + ")",
                [r](double xi) { return std::pow(1.0 + xi * xi, 0.5 * r); }, true, std::move(cfg));
}

/// Symbol synthesized from an atomic measure: m(x) = sum_j w_j t_j^(x^2).
/// The order is -infinity unless an atom sits at t = 1 (constant part).
inline Symbol from_atoms(const MeasureAtoms& a) {
  nlohmann::json atoms_json = nlohmann::json::array();
  for (const auto& at : a.atoms()) atoms_json.push_back({{"t", at.t}, {"w", at.w}});
  const double order = a.has_unit_atom() ? 0.0 : -std::numeric_limits<double>::infinity();
  return Symbol(SymbolKind::AtomSynthesized, order, "atoms", [a](double xi) { return a.moment(xi * xi); }, true,
                {{"kind", "atoms"}, {"atoms", atoms_json}}, a);
}

/// Arbitrary user symbol; used for negative controls and tests.
inline Symbol custom_symbol(std::string label, SymbolKind kind, double order, Symbol::Function fn,
                            bool real_extension = true) {
  nlohmann::json cfg = {{"kind", "custom"}, {"label", label}};
  return Symbol(kind, order, std::move(label), std::move(fn), real_extension, std::move(cfg));
}

inline Symbol symbol_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string())
    throw DomainError("symbol config: missing string field 'kind'");
  const std::string kind = j["kind"];
  const auto policy = j.value("allow_nonnegative_order", false) ? OrderPolicy::AllowNonnegative
                                                                 : OrderPolicy::RequireNegative;
  auto need_r = [&]() {
    if (!j.contains("r") || !j["r"].is_number()) throw DomainError("symbol config: '" + kind + "' needs numeric 'r'");
    return j["r"].get<double>();
  };
  if (kind == "fkdv") return fkdv(need_r(), policy);
  if (kind == "whitham") return whitham();
  if (kind == "bessel") return bessel(need_r(), policy);
  if (kind == "atoms") {
    if (!j.contains("atoms") || !j["atoms"].is_array()) throw DomainError("symbol config: 'atoms' must be an array");
    std::vector<Atom> atoms;
    for (const auto& a : j["atoms"]) {
      if (!a.contains("t") || !a.contains("w") || !a["t"].is_number() || !a["w"].is_number())
        throw DomainError("symbol config: each atom needs numeric 't' and 'w'");
      atoms.push_back({a["t"].get<double>(), a["w"].get<double>()});
    }
    return from_atoms(MeasureAtoms(std::move(atoms)));
  }
  throw DomainError("symbol config: unknown kind '" + kind + "'");
}

// ---------------------------------------------------------------------------
// Forward differences

inline constexpr int kDifferenceCap = 40;

struct DifferenceTerms {
  double value = 0.0;    ///< Delta^n n_k
  double abs_sum = 0.0;  ///< sum_j C(n,j) |n_{k+n-j}|
  double max_term = 0.0; ///< max_j C(n,j) |n_{k+n-j}|
};

/// Delta^n seq(k) = sum_j (-1)^j C(n,j) seq(k+n-j), with term magnitudes
/// for cancellation diagnostics.
template <class Seq>
DifferenceTerms forward_difference_terms(const Seq& seq, int n, long k, int cap = kDifferenceCap) {
  if (n < 0) throw DomainError("difference: order must be nonnegative");
  if (n > cap) throw CapabilityError("difference: order " + std::to_string(n) + " exceeds cap " + std::to_string(cap));
  DifferenceTerms out;
  double binom = 1.0;
  for (int j = 0; j <= n; ++j) {
    const double term = binom * seq(k + n - j);
    out.value += (j % 2 == 0) ? term : -term;
    out.abs_sum += std::abs(term);
    out.max_term = std::max(out.max_term, std::abs(term));
    binom = binom * (n - j) / (j + 1);
  }
  return out;
}

template <class Seq>
double forward_difference(const Seq& seq, int n, long k, int cap = kDifferenceCap) {
  return forward_difference_terms(seq, n, k, cap).value;
}

inline double difference(const Symbol& s, int n, long k, int cap = kDifferenceCap) {
  if (s.homogeneous() && k < 1) throw DomainError("difference: k must be >= 1 for a homogeneous symbol");
  return forward_difference(s, n, k, cap);
}

// ---------------------------------------------------------------------------
// Complete monotonicity

struct CMOptions {
  double tolerance = 1e-12;          ///< relative to the largest binomial term
  double cancellation_factor = 1e3;  ///< x unit roundoff x sum|terms|
};

struct CMReport {
  int max_order_tested = 0;
  long max_index_tested = 0;
  long k_start = 0;
  double min_signed_difference = std::numeric_limits<double>::infinity();
  int worst_order = 0;
  long worst_index = 0;
  long indeterminate_count = 0;
  double tolerance = 1e-12;
  bool passed = false;
};

/// Tests (-1)^n Delta^n n_k >= 0 for 0 <= n <= n_max, k_start <= k <= k_max.
/// Signed differences are normalized by max(1, largest term). Negative values
/// inside the cancellation noise band are counted as indeterminate instead of
/// failing.
template <class Seq>
CMReport cm_test(const Seq& seq, int n_max, long k_max, long k_start = 0, const CMOptions& opt = {}) {
  if (n_max > kDifferenceCap) throw CapabilityError("cm_test: n_max exceeds difference cap");
  std::vector<double> cache;
  cache.reserve(static_cast<std::size_t>(k_max - k_start + n_max + 1));
  for (long k = k_start; k <= k_max + n_max; ++k) cache.push_back(seq(k));
  auto cached = [&](long k) { return cache[static_cast<std::size_t>(k - k_start)]; };

  CMReport rep;
  rep.max_order_tested = n_max;
  rep.max_index_tested = k_max;
  rep.k_start = k_start;
  rep.tolerance = opt.tolerance;
  constexpr double u = std::numeric_limits<double>::epsilon() / 2;
  for (int n = 0; n <= n_max; ++n) {
    for (long k = k_start; k <= k_max; ++k) {
      const auto t = forward_difference_terms(cached, n, k);
      const double signed_value = (n % 2 == 0) ? t.value : -t.value;
      if (signed_value < 0.0 && -signed_value <= opt.cancellation_factor * u * t.abs_sum) {
        ++rep.indeterminate_count;
        continue;
      }
      const double normalized = signed_value / std::max(1.0, t.max_term);
      if (normalized < rep.min_signed_difference) {
        rep.min_signed_difference = normalized;
        rep.worst_order = n;
        rep.worst_index = k;
      }
    }
  }
  rep.passed = rep.min_signed_difference >= -opt.tolerance;
  return rep;
}

/// Assumption (S): k -> m(sqrt(k)) completely monotone. Starts at k = 0
/// when m(0) is defined, else at k = 1.
inline CMReport assumption_S_check(const Symbol& s, int n_max = 8, long k_max = 50, const CMOptions& opt = {}) {
  if (!s.has_real_extension()) throw CapabilityError("assumption_S_check: symbol lacks a real-argument extension");
  const long k_start = s.homogeneous() ? 1 : 0;
  return cm_test([&s](long k) { return s.at(std::sqrt(static_cast<double>(k))); }, n_max, k_max, k_start, opt);
}

// ---------------------------------------------------------------------------
// Symbol order

enum class OrderStatus { Fitted, Vanishing, NoiseLimited };

inline const char* to_string(OrderStatus s) {
  switch (s) {
    case OrderStatus::Fitted: return "fitted";
    case OrderStatus::Vanishing: return "vanishing";
    case OrderStatus::NoiseLimited: return "noise_limited";
  }
  return "unknown";
}

struct OrderFit {
  int n = 0;
  OrderStatus status = OrderStatus::Fitted;
  double slope = 0.0;
  double constant = 0.0;   ///< exp(intercept) of the log-log fit
  double threshold = 0.0;  ///< r - n + slope_tolerance
  int points = 0;
  bool passed = false;
};

struct OrderReport {
  double order = 0.0;
  double slope_tolerance = 0.1;
  long k_lo = 0;
  long k_hi = 0;
  std::vector<OrderFit> fits;
  bool passed = false;
};

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double rms = 0.0;
};

inline LineFit least_squares_line(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  LineFit f;
  const double den = n * sxx - sx * sx;
  f.slope = den != 0.0 ? (n * sxy - sx * sy) / den : 0.0;
  f.intercept = (sy - f.slope * sx) / n;
  double ss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (f.intercept + f.slope * x[i]);
    ss += r * r;
  }
  f.rms = std::sqrt(ss / n);
  return f;
}

/// Fits log|Delta^n m(k)| against log(1+k) over k in [k_max/2, k_max] for
/// each n <= n_max; passes when slope <= r - n + slope_tolerance.
inline OrderReport symbol_order_check(const Symbol& s, int n_max, long k_max, double slope_tolerance = 0.1) {
  if (n_max > kDifferenceCap) throw CapabilityError("symbol_order_check: n_max exceeds difference cap");
  OrderReport rep;
  rep.order = s.order();
  rep.slope_tolerance = slope_tolerance;
  rep.k_lo = std::max<long>(k_max / 2, 1);
  rep.k_hi = k_max;
  rep.passed = true;
  constexpr double u = std::numeric_limits<double>::epsilon() / 2;
  for (int n = 0; n <= n_max; ++n) {
    OrderFit fit;
    fit.n = n;
    fit.threshold = s.order() - n + slope_tolerance;
    std::vector<double> lx, ly;
    bool all_zero = true;
    for (long k = rep.k_lo; k <= rep.k_hi; ++k) {
      const auto t = forward_difference_terms(s, n, k);
      if (t.value != 0.0) all_zero = false;
      if (std::abs(t.value) > 1e3 * u * t.abs_sum) {
        lx.push_back(std::log1p(static_cast<double>(k)));
        ly.push_back(std::log(std::abs(t.value)));
      }
    }
    if (all_zero) {
      fit.status = OrderStatus::Vanishing;
      fit.passed = true;
    } else if (lx.size() < 3) {
      fit.status = OrderStatus::NoiseLimited;
      fit.passed = true;
    } else {
      const auto line = least_squares_line(lx, ly);
      fit.slope = line.slope;
      fit.constant = std::exp(line.intercept);
      fit.points = static_cast<int>(lx.size());
      fit.passed = fit.slope <= fit.threshold;
    }
    rep.passed = rep.passed && fit.passed;
    rep.fits.push_back(fit);
  }
  return rep;
}

inline nlohmann::json to_json(const CMReport& r) {
  return {{"max_order_tested", r.max_order_tested},
          {"max_index_tested", r.max_index_tested},
          {"k_start", r.k_start},
          {"index_convention", r.k_start == 0 ? "N0" : "N"},
          {"min_signed_difference", r.min_signed_difference},
          {"worst_order", r.worst_order},
          {"worst_index", r.worst_index},
          {"indeterminate_count", r.indeterminate_count},
          {"tolerance", r.tolerance},
          {"passed", r.passed}};
}

inline nlohmann::json to_json(const OrderReport& r) {
  nlohmann::json fits = nlohmann::json::array();
  for (const auto& f : r.fits)
    fits.push_back({{"n", f.n},
                    {"status", to_string(f.status)},
                    {"slope", f.slope},
                    {"constant", f.constant},
                    {"threshold", f.threshold},
                    {"points", f.points},
                    {"passed", f.passed}});
  return {{"order", std::isfinite(r.order) ? nlohmann::json(r.order) : nlohmann::json("-inf")},
          {"slope_tolerance", r.slope_tolerance},
          {"k_lo", r.k_lo},
          {"k_hi", r.k_hi},
          {"fits", fits},
          {"passed", r.passed}};
}

}  // namespace nwl

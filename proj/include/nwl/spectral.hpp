#pragma once

// Periodic grid on [-pi, pi), discrete Fourier pair with the 1/(2 pi)
// analysis convention, dealiased products, derivatives and interpolation.

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "nwl/errors.hpp"
#include "nwl/symbols.hpp"

namespace nwl {

using cplx = std::complex<double>;
inline constexpr double kPi = std::numbers::pi;

class PeriodicGrid {
 public:
  explicit PeriodicGrid(int n) : n_(n) {
    if (n < 8 || n % 2 != 0) throw DomainError("PeriodicGrid: n must be even and >= 8");
  }
  int n() const noexcept { return n_; }
  int nyquist() const noexcept { return n_ / 2; }
  double spacing() const noexcept { return 2.0 * kPi / n_; }
  double x(int j) const noexcept { return -kPi + 2.0 * kPi * j / n_; }
  /// Index of the grid point x = 0.
  int origin_index() const noexcept { return n_ / 2; }
  std::vector<double> points() const {
    std::vector<double> p(static_cast<std::size_t>(n_));
    for (int j = 0; j < n_; ++j) p[static_cast<std::size_t>(j)] = x(j);
    return p;
  }
  bool operator==(const PeriodicGrid& o) const noexcept { return n_ == o.n_; }

 private:
  int n_;
};

namespace detail {

inline Eigen::FFT<double>& fft_engine() {
  thread_local Eigen::FFT<double> engine = [] {
    Eigen::FFT<double> e;
    e.SetFlag(Eigen::FFT<double>::Unscaled);
    return e;
  }();
  return engine;
}

/// out[m] = sum_j in[j] exp(-2 pi i m j / n)
inline std::vector<cplx> dft_forward(const std::vector<cplx>& in) {
  std::vector<cplx> out;
  fft_engine().fwd(out, in);
  return out;
}

/// out[j] = sum_m in[m] exp(+2 pi i m j / n)
inline std::vector<cplx> dft_inverse(const std::vector<cplx>& in) {
  std::vector<cplx> out;
  fft_engine().inv(out, in);
  return out;
}

inline int signed_mode(int idx, int n) { return idx <= n / 2 ? idx : idx - n; }
inline int storage_index(int k, int n) { return k >= 0 ? k : k + n; }

}  // namespace detail

/// Fourier coefficients c(k) = (1/2pi) int f e^{-ikx} dx from grid samples.
/// Storage is in FFT order; index n/2 holds the grid-visible Nyquist mode.
inline std::vector<cplx> analyze(const PeriodicGrid& grid, const std::vector<double>& values) {
  const int n = grid.n();
  if (static_cast<int>(values.size()) != n) throw DomainError("analyze: length does not match grid");
  std::vector<cplx> in(values.begin(), values.end());
  auto out = detail::dft_forward(in);
  for (int m = 0; m < n; ++m) out[static_cast<std::size_t>(m)] *= ((m % 2) ? -1.0 : 1.0) / n;
  return out;
}

/// Grid values f(x_j) = sum_k c(k) e^{i k x_j}; real part is returned.
inline std::vector<double> synthesize(const PeriodicGrid& grid, const std::vector<cplx>& coeffs) {
  const int n = grid.n();
  if (static_cast<int>(coeffs.size()) != n) throw DomainError("synthesize: length does not match grid");
  std::vector<cplx> in(coeffs);
  for (int m = 0; m < n; ++m) in[static_cast<std::size_t>(m)] *= (m % 2) ? -1.0 : 1.0;
  const auto out = detail::dft_inverse(in);
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) v[static_cast<std::size_t>(j)] = out[static_cast<std::size_t>(j)].real();
  return v;
}

/// A real 2pi-periodic function held as grid samples and Fourier
/// coefficients, always mutually consistent.
class SpectralField {
 public:
  SpectralField(PeriodicGrid grid, std::vector<double> values)
      : grid_(grid), values_(std::move(values)), coeffs_(analyze(grid_, values_)) {}

  static SpectralField from_values(PeriodicGrid grid, std::vector<double> values) {
    return SpectralField(grid, std::move(values));
  }

  /// Builds from coefficients in FFT order. Non-Hermitian input is projected
  /// onto real fields.
  static SpectralField from_coeffs(PeriodicGrid grid, const std::vector<cplx>& coeffs) {
    return SpectralField(grid, synthesize(grid, coeffs));
  }

  static SpectralField from_function(PeriodicGrid grid, const std::function<double(double)>& f) {
    std::vector<double> v(static_cast<std::size_t>(grid.n()));
    for (int j = 0; j < grid.n(); ++j) v[static_cast<std::size_t>(j)] = f(grid.x(j));
    return SpectralField(grid, std::move(v));
  }

  static SpectralField constant(PeriodicGrid grid, double value) {
    return SpectralField(grid, std::vector<double>(static_cast<std::size_t>(grid.n()), value));
  }

  const PeriodicGrid& grid() const noexcept { return grid_; }
  int size() const noexcept { return grid_.n(); }
  const std::vector<double>& values() const noexcept { return values_; }
  const std::vector<cplx>& coeffs() const noexcept { return coeffs_; }
  double operator[](int j) const { return values_[static_cast<std::size_t>(j)]; }

  /// c(k) for -n/2 < k <= n/2.
  cplx coeff(int k) const {
    const int n = grid_.n();
    if (k <= -n / 2 || k > n / 2) throw DomainError("coeff: mode outside the grid band");
    return coeffs_[static_cast<std::size_t>(detail::storage_index(k, n))];
  }

  double mean() const { return coeffs_[0].real(); }
  double max() const { return *std::max_element(values_.begin(), values_.end()); }
  double min() const { return *std::min_element(values_.begin(), values_.end()); }
  int argmax() const { return static_cast<int>(std::max_element(values_.begin(), values_.end()) - values_.begin()); }
  int argmin() const { return static_cast<int>(std::min_element(values_.begin(), values_.end()) - values_.begin()); }
  double max_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
  }

  /// Trigonometric interpolant at an arbitrary point (Nyquist taken as cosine).
  double evaluate(double y) const {
    const int n = grid_.n();
    double s = coeffs_[0].real();
    for (int k = 1; k < n / 2; ++k) s += 2.0 * (coeffs_[static_cast<std::size_t>(k)] * std::polar(1.0, k * y)).real();
    s += coeffs_[static_cast<std::size_t>(n / 2)].real() * std::cos(0.5 * n * y);
    return s;
  }

  SpectralField operator+(const SpectralField& o) const { return combine(o, [](double a, double b) { return a + b; }); }
  SpectralField operator-(const SpectralField& o) const { return combine(o, [](double a, double b) { return a - b; }); }
  SpectralField operator*(double a) const {
    auto v = values_;
    for (auto& x : v) x *= a;
    return SpectralField(grid_, std::move(v));
  }
  SpectralField operator+(double a) const {
    auto v = values_;
    for (auto& x : v) x += a;
    return SpectralField(grid_, std::move(v));
  }
  /// Pointwise (collocation) product; see multiply_dealiased for the
  /// alias-free product.
  SpectralField pointwise_product(const SpectralField& o) const {
    return combine(o, [](double a, double b) { return a * b; });
  }

 private:
  template <class Op>
  SpectralField combine(const SpectralField& o, Op op) const {
    if (!(grid_ == o.grid_)) throw DomainError("SpectralField: grid mismatch");
    std::vector<double> v(values_.size());
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = op(values_[j], o.values_[j]);
    return SpectralField(grid_, std::move(v));
  }

  PeriodicGrid grid_;
  std::vector<double> values_;
  std::vector<cplx> coeffs_;
};

inline SpectralField operator*(double a, const SpectralField& f) { return f * a; }

/// Applies a real even multiplier k -> mult(k) in coefficient space. The
/// Nyquist mode is zeroed; mult is not called for it.
template <class Mult>
SpectralField apply_multiplier(const SpectralField& f, Mult&& mult) {
  const int n = f.size();
  std::vector<cplx> c(f.coeffs());
  for (int idx = 0; idx < n; ++idx) {
    if (idx == n / 2) {
      c[static_cast<std::size_t>(idx)] = 0.0;
      continue;
    }
    c[static_cast<std::size_t>(idx)] *= mult(detail::signed_mode(idx, n));
  }
  return SpectralField::from_coeffs(f.grid(), c);
}

/// Spectral derivative: c'(k) = i k c(k), Nyquist zeroed.
inline SpectralField derivative(const SpectralField& f) {
  const int n = f.size();
  std::vector<cplx> c(f.coeffs());
  for (int idx = 0; idx < n; ++idx) {
    const int k = detail::signed_mode(idx, n);
    c[static_cast<std::size_t>(idx)] = (idx == n / 2) ? cplx(0.0) : cplx(0.0, k) * c[static_cast<std::size_t>(idx)];
  }
  return SpectralField::from_coeffs(f.grid(), c);
}

/// g(x) = f(x - tau).
inline SpectralField translate(const SpectralField& f, double tau) {
  const int n = f.size();
  std::vector<cplx> c(f.coeffs());
  for (int idx = 0; idx < n; ++idx) {
    const int k = detail::signed_mode(idx, n);
    c[static_cast<std::size_t>(idx)] *= std::polar(1.0, -k * tau);
  }
  c[static_cast<std::size_t>(n / 2)] = f.coeffs()[static_cast<std::size_t>(n / 2)].real() * std::cos(0.5 * n * tau);
  return SpectralField::from_coeffs(f.grid(), c);
}

/// g(x) = f(2 lambda - x).
inline SpectralField reflect(const SpectralField& f, double lambda) {
  const int n = f.size();
  std::vector<cplx> c(static_cast<std::size_t>(n));
  for (int idx = 0; idx < n; ++idx) {
    const int k = detail::signed_mode(idx, n);
    c[static_cast<std::size_t>(idx)] = std::conj(f.coeffs()[static_cast<std::size_t>(idx)]) * std::polar(1.0, -2.0 * k * lambda);
  }
  c[static_cast<std::size_t>(n / 2)] = f.coeffs()[static_cast<std::size_t>(n / 2)].real() * std::cos(n * lambda);
  return SpectralField::from_coeffs(f.grid(), c);
}

/// Band-limited interpolation onto a finer grid (N >= n).
inline SpectralField resample(const SpectralField& f, int N) {
  const int n = f.size();
  if (N < n || N % 2 != 0) throw DomainError("resample: target size must be even and >= source size");
  if (N == n) return f;
  std::vector<cplx> c(static_cast<std::size_t>(N), cplx(0.0));
  for (int idx = 0; idx < n; ++idx) {
    const int k = detail::signed_mode(idx, n);
    if (idx == n / 2) {
      const double half = 0.5 * f.coeffs()[static_cast<std::size_t>(idx)].real();
      c[static_cast<std::size_t>(n / 2)] += half;
      c[static_cast<std::size_t>(N - n / 2)] += half;
    } else {
      c[static_cast<std::size_t>(detail::storage_index(k, N))] = f.coeffs()[static_cast<std::size_t>(idx)];
    }
  }
  return SpectralField::from_coeffs(PeriodicGrid(N), c);
}

/// Product with 3/2-rule zero padding: the retained band |k| <= n/2 is
/// free of quadratic aliasing.
inline SpectralField multiply_dealiased(const SpectralField& f, const SpectralField& g) {
  if (!(f.grid() == g.grid())) throw DomainError("multiply_dealiased: grid mismatch");
  const int n = f.size();
  const int P = 3 * n / 2;
  auto pad = [&](const SpectralField& h) {
    std::vector<cplx> c(static_cast<std::size_t>(P), cplx(0.0));
    for (int idx = 0; idx < n; ++idx) {
      const int k = detail::signed_mode(idx, n);
      const cplx v = h.coeffs()[static_cast<std::size_t>(idx)];
      if (idx == n / 2) {
        c[static_cast<std::size_t>(n / 2)] += 0.5 * v.real();
        c[static_cast<std::size_t>(P - n / 2)] += 0.5 * v.real();
      } else {
        c[static_cast<std::size_t>(detail::storage_index(k, P))] = v;
      }
    }
    // Plain exp(+i k y_j) synthesis on the padded grid; the grid offset
    // cancels between synthesis and analysis.
    return detail::dft_inverse(c);
  };
  const auto a = pad(f);
  const auto b = pad(g);
  std::vector<cplx> prod(static_cast<std::size_t>(P));
  for (int j = 0; j < P; ++j) prod[static_cast<std::size_t>(j)] = cplx(a[static_cast<std::size_t>(j)].real() * b[static_cast<std::size_t>(j)].real(), 0.0);
  auto pc = detail::dft_forward(prod);
  std::vector<cplx> c(static_cast<std::size_t>(n), cplx(0.0));
  for (int idx = 0; idx < n; ++idx) {
    const int k = detail::signed_mode(idx, n);
    if (idx == n / 2) {
      c[static_cast<std::size_t>(idx)] = (pc[static_cast<std::size_t>(n / 2)] + pc[static_cast<std::size_t>(P - n / 2)]) / double(P);
    } else {
      c[static_cast<std::size_t>(idx)] = pc[static_cast<std::size_t>(detail::storage_index(k, P))] / double(P);
    }
  }
  return SpectralField::from_coeffs(f.grid(), c);
}

/// Parseval check quantity: (2pi/n) sum_j f_j^2.
inline double l2_norm_squared(const SpectralField& f) {
  double s = 0.0;
  for (double v : f.values()) s += v * v;
  return s * f.grid().spacing();
}

inline double max_abs_difference(const SpectralField& a, const SpectralField& b) {
  double m = 0.0;
  for (int j = 0; j < a.size(); ++j) m = std::max(m, std::abs(a[j] - b[j]));
  return m;
}

struct DecayReport {
  bool resolved = false;  ///< spectrum below floor throughout the window
  double slope = 0.0;
  int points = 0;
  int k_lo = 0;
  int k_hi = 0;
};

/// Least-squares slope of log|c(k)| against log k over k in [n/8, n/4].
inline DecayReport decay_rate(const SpectralField& f, double floor = 1e-14) {
  const int n = f.size();
  DecayReport rep;
  rep.k_lo = std::max(1, n / 8);
  rep.k_hi = n / 4;
  double cmax = 0.0;
  for (const auto& c : f.coeffs()) cmax = std::max(cmax, std::abs(c));
  if (cmax == 0.0) throw DomainError("decay_rate: field is identically zero");
  const double cut = floor * std::max(1.0, cmax);
  std::vector<double> lx, ly;
  for (int k = rep.k_lo; k <= rep.k_hi; ++k) {
    const double a = std::abs(f.coeff(k));
    if (a <= cut) continue;
    lx.push_back(std::log(static_cast<double>(k)));
    ly.push_back(std::log(a));
  }
  rep.points = static_cast<int>(lx.size());
  if (lx.size() < 3) {
    rep.resolved = true;
    return rep;
  }
  rep.slope = least_squares_line(lx, ly).slope;
  return rep;
}

// ---------------------------------------------------------------------------
// CSV

inline std::string profile_csv(const SpectralField& f) {
  std::ostringstream os;
  os.precision(17);
  os << "x,value\n";
  for (int j = 0; j < f.size(); ++j) os << f.grid().x(j) << ',' << f[j] << '\n';
  return os.str();
}

inline std::string coefficients_csv(const SpectralField& f) {
  std::ostringstream os;
  os.precision(17);
  os << "k,re,im\n";
  const int n = f.size();
  for (int k = -n / 2 + 1; k <= n / 2; ++k) {
    const cplx c = f.coeff(k);
    os << k << ',' << c.real() << ',' << c.imag() << '\n';
  }
  return os.str();
}

/// Parses an "x,value" CSV in grid order; the x column must match the grid.
inline SpectralField parse_profile_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line) || line.rfind("x,value", 0) != 0) throw DomainError("profile CSV: missing header 'x,value'");
  std::vector<double> xs, vs;
  while (std::getline(is, line)) {
    if (line.empty() || line == "\r") continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw DomainError("profile CSV: malformed row");
    try {
      xs.push_back(std::stod(line.substr(0, comma)));
      vs.push_back(std::stod(line.substr(comma + 1)));
    } catch (const std::exception&) {
      throw DomainError("profile CSV: non-numeric entry");
    }
  }
  const PeriodicGrid grid(static_cast<int>(vs.size()));
  for (int j = 0; j < grid.n(); ++j)
    if (std::abs(xs[static_cast<std::size_t>(j)] - grid.x(j)) > 1e-9) throw DomainError("profile CSV: x column is not the standard grid");
  return SpectralField(grid, std::move(vs));
}

}  // namespace nwl

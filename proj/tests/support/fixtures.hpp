#pragma once

// Branches shared by several tests in one binary, computed once.

#include "nwl/nwl.hpp"

namespace nwl_test {

inline const nwl::Branch& whitham_branch_256() {
  static const nwl::Branch br = [] {
    nwl::BranchOptions o;
    o.theta = 0.9;
    return nwl::continue_branch(nwl::whitham(), nwl::PeriodicGrid(256), o);
  }();
  return br;
}

/// Profile of `br` whose height ratio is closest to `ratio`.
inline const nwl::WaveProfile& closest(const nwl::Branch& br, double ratio) {
  const nwl::WaveProfile* best = &br.profiles.front();
  for (const auto& p : br.profiles)
    if (std::abs(p.height_ratio() - ratio) < std::abs(best->height_ratio() - ratio)) best = &p;
  return *best;
}

/// Whitham wave at height ratio about 0.5, re-solved on n points.
inline nwl::WaveProfile whitham_mid(int n) {
  const auto& p = closest(whitham_branch_256(), 0.5);
  if (n == p.phi.size()) return p;
  nwl::WaveProfile q(nwl::resample(p.phi, n), p.c, p.b, p.symbol);
  return nwl::newton_solve(q, nwl::Constraint::fix_height(q.height()));
}

/// The oscillatory non-CM control symbol e^{-k/5} (1 + 0.9 cos k).
inline nwl::Symbol oscillatory_control() {
  return nwl::custom_symbol(
      "oscillatory-control", nwl::SymbolKind::Inhomogeneous, -std::numeric_limits<double>::infinity(),
      [](double k) { return std::exp(-std::abs(k) / 5.0) * (1.0 + 0.9 * std::cos(k)); }, true);
}

}  // namespace nwl_test

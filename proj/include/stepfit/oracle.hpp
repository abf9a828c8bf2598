#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include <stepfit/curve.hpp>
#include <stepfit/errors.hpp>
#include <stepfit/projection.hpp>
#include <stepfit/summation.hpp>
#include <stepfit/weighting.hpp>

namespace stepfit {

/*!
  Brute-force engines that re-derive the closed forms by blunt numerics.
  They share no integration logic with the main path: riemann_loss samples
  the weight density pointwise on a uniform grid, grid_fit scans candidate
  levels exhaustively. Slow on purpose; they exist to be believed, and the
  CLI exposes them behind --verify.
*/
struct OracleConfig {
  /// Midpoint-rule cell width in price units.
  double step = 1e-3;

  /// Scan truncates at this price; 0 means "derive from the inputs": past the
  /// weight's support for a bounded weight, and far enough beyond the last
  /// breakpoint of a decaying one that the discarded tail is negligible even
  /// relative to the post-knot contribution it belongs to.
  double truncation_price = 0.0;

  /// Final resolution of the coefficient scan.
  double scan_step = 1e-7;

  double resolve_truncation(const StepCurve& a, const StepCurve& b,
                            const WeightSpec& w) const {
    if (truncation_price > 0.0) return truncation_price;
    if (const auto* u = std::get_if<UniformWeight>(&w)) return u->p_max.units();
    const double rate = std::get<ExponentialWeight>(w).rate;
    const double knots_end =
        std::max(a.max_price().units(), b.max_price().units());
    return knots_end + std::log(1e9) / rate + 1.0;
  }
};

/*!
  Midpoint Riemann sum of |A - B|^r W over [0, P_cut]. Cells never straddle a
  tick, so for tick-aligned curves the only discretization error is the
  smooth-weight quadrature error, and the sum converges to the exact loss as
  the step shrinks.
*/
inline double riemann_loss(const StepCurve& a, const StepCurve& b,
                           const WeightSpec& w, double r,
                           const OracleConfig& cfg = {}) {
  if (!(cfg.step > 0.0)) throw Error("oracle step must be positive");
  const double cut = cfg.resolve_truncation(a, b, w);
  const auto cells = static_cast<std::int64_t>(std::ceil(cut / cfg.step));
  NeumaierSum total;
  for (std::int64_t k = 0; k < cells; ++k) {
    const double mid = (static_cast<double>(k) + 0.5) * cfg.step;
    const double wd = density(w, mid);
    if (wd == 0.0) continue;
    const double delta = a.value_at_units(mid) - b.value_at_units(mid);
    if (delta == 0.0) continue;
    total.add(detail::pow_r(std::abs(delta), r) * wd * cfg.step);
  }
  return total.value();
}

namespace detail {

/// Exact piecewise objective of one interval at level c (same integrand the
/// derivative bisection differentiates, evaluated bluntly).
inline double interval_objective(
    const std::vector<std::pair<double, double>>& segs, double c, double r) {
  NeumaierSum obj;
  for (const auto& [value, mass] : segs)
    obj.add(pow_r(std::abs(value - c), r) * mass);
  return obj.value();
}

}  // namespace detail

/*!
  Per-interval exhaustive search for the best theta levels: candidates are
  every segment value of C in the interval plus a uniform grid over the value
  range, re-scanned at shrinking spacing around the incumbent until the grid
  is finer than cfg.scan_step. Convexity of the objective (r >= 1) makes the
  refinement sound. Ties resolve to the lower candidate.
*/
inline std::vector<double> grid_fit(const StepCurve& curve, const NodeSet& nodes,
                                    const WeightSpec& w, double r,
                                    const OracleConfig& cfg = {}) {
  if (!(cfg.scan_step > 0.0)) throw Error("oracle scan step must be positive");
  const auto ivs = detail::decompose(curve, nodes, w);
  std::vector<double> levels(ivs.size());
  for (std::size_t i = 0; i < ivs.size(); ++i) {
    const auto& iv = ivs[i];
    if (iv.mass <= 0.0) {
      levels[i] = i > 0 ? levels[i - 1] : 0.0;
      continue;
    }
    double best = iv.segments.front().first;
    double best_obj = detail::interval_objective(iv.segments, best, r);
    auto consider = [&](double c) {
      const double obj = detail::interval_objective(iv.segments, c, r);
      if (obj < best_obj || (obj == best_obj && c < best)) {
        best_obj = obj;
        best = c;
      }
    };
    for (const auto& [value, mass] : iv.segments) consider(value);
    double lo = iv.value_lo;
    double hi = iv.value_hi;
    while (hi - lo > cfg.scan_step) {
      const int points = 64;
      const double spacing = (hi - lo) / points;
      for (int k = 0; k <= points; ++k) consider(lo + spacing * k);
      lo = std::max(iv.value_lo, best - spacing);
      hi = std::min(iv.value_hi, best + spacing);
    }
    levels[i] = best;
  }
  return levels;
}

}  // namespace stepfit

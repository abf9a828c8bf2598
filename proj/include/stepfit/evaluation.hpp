#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include <stepfit/curve.hpp>
#include <stepfit/errors.hpp>
#include <stepfit/hour.hpp>
#include <stepfit/parallel.hpp>
#include <stepfit/projection.hpp>
#include <stepfit/summation.hpp>

namespace stepfit {

/*!
  A panel of hourly supply curves with a declared train/test split:
  hours before `train_end` are training, hours at or after it are test.
*/
struct CurvePanel {
  std::map<HourStamp, StepCurve> curves;
  HourStamp train_end;

  bool in_training(HourStamp t) const { return t < train_end; }

  std::vector<const StepCurve*> training_curves() const {
    std::vector<const StepCurve*> out;
    for (const auto& [t, c] : curves)
      if (in_training(t)) out.push_back(&c);
    return out;
  }

  std::vector<const StepCurve*> test_curves() const {
    std::vector<const StepCurve*> out;
    for (const auto& [t, c] : curves)
      if (!in_training(t)) out.push_back(&c);
    return out;
  }

  /// Maximum knot price over training curves (drives uniform:auto weights).
  Price max_training_price() const {
    Price p = Price::zero();
    for (const auto& [t, c] : curves)
      if (in_training(t) && c.max_price() > p) p = c.max_price();
    return p;
  }
};

/*!
  || C_t - C_{t-24} ||_r^r: the prediction error of the naive forecast that
  reuses yesterday's same-hour curve. nullopt when either hour is missing;
  callers skip such slots rather than interpolate.
*/
inline std::optional<double> naive_prediction_error(const CurvePanel& panel,
                                                    HourStamp t,
                                                    const WeightSpec& w,
                                                    double r) {
  const auto now = panel.curves.find(t);
  const auto prev = panel.curves.find(t - 24);
  if (now == panel.curves.end() || prev == panel.curves.end())
    return std::nullopt;
  return curve_distance(now->second, prev->second, w, r);
}

struct NaiveErrorStats {
  double mean = 0.0;
  std::size_t pairs = 0;    // slots that had a previous-day partner
  std::size_t skipped = 0;  // slots without one (data holes, first day)
};

enum class Window { training, test };

/*!
  Mean naive prediction error over one window of the panel. Training slots
  pair only within the training window; test slots may reach back across the
  boundary (the previous-day curve is known at forecast time either way).
*/
inline NaiveErrorStats mean_naive_error(const CurvePanel& panel, Window window,
                                        const WeightSpec& w, double r) {
  NaiveErrorStats stats;
  NeumaierSum sum;
  for (const auto& [t, curve] : panel.curves) {
    if ((window == Window::training) != panel.in_training(t)) continue;
    const auto prev = panel.curves.find(t - 24);
    const bool prev_ok =
        prev != panel.curves.end() &&
        (window == Window::test || panel.in_training(t - 24));
    if (!prev_ok) {
      ++stats.skipped;
      continue;
    }
    sum.add(curve_distance(curve, prev->second, w, r));
    ++stats.pairs;
  }
  if (stats.pairs == 0) throw NoNaivePairsError();
  stats.mean = sum.value() / static_cast<double>(stats.pairs);
  return stats;
}

/// Mean training-window naive error, the reference level P-bar that node
/// selection races against.
inline NaiveErrorStats mean_prediction_error(const CurvePanel& panel,
                                             const WeightSpec& w, double r) {
  return mean_naive_error(panel, Window::training, w, r);
}

/*!
  Mean L_r approximation error of a curve set on a fixed node grid. Curves fit
  independently (fanned out across workers); the reduction always runs in
  input order, so results do not depend on the thread count.
*/
inline double mean_approx_error(std::span<const StepCurve* const> curves,
                                const NodeSet& nodes, const WeightSpec& w,
                                double r, unsigned threads = 1) {
  if (curves.empty()) throw Error("mean approximation error of an empty set");
  std::vector<double> losses(curves.size());
  parallel_for(curves.size(), threads,
               [&](std::size_t i) { losses[i] = fit(*curves[i], nodes, w, r).loss; });
  NeumaierSum sum;
  for (const double l : losses) sum.add(l);
  return sum.value() / static_cast<double>(curves.size());
}

/// A panel whose quantities were divided by the training maximum; errors
/// computed on it are the scaled approximation errors (MScApE for r = 2).
struct ScaledPanel {
  CurvePanel panel;
  double scale = 1.0;
};

/*!
  Scales every curve (train and test) by the maximum total quantity observed
  in the training window. Prices are untouched, so node grids and weights are
  shared between the scaled and unscaled panels.
*/
inline ScaledPanel scale_panel(const CurvePanel& panel) {
  double scale = 0.0;
  for (const auto& [t, c] : panel.curves)
    if (panel.in_training(t)) scale = std::max(scale, c.total());
  if (!(scale > 0.0)) throw Error("cannot scale: empty training window");
  ScaledPanel out;
  out.scale = scale;
  out.panel.train_end = panel.train_end;
  for (const auto& [t, c] : panel.curves) {
    std::vector<StepCurve::Knot> knots;
    knots.reserve(c.knots().size());
    for (const auto& k : c.knots()) knots.push_back({k.price, k.value / scale});
    out.panel.curves.emplace(t, StepCurve::from_knots(std::move(knots)));
  }
  return out;
}

}  // namespace stepfit

#pragma once

#include <algorithm>
#include <span>
#include <utility>
#include <vector>

#include <stepfit/errors.hpp>
#include <stepfit/hour.hpp>
#include <stepfit/price.hpp>

namespace stepfit {

/// One (timestamp, price, quantity) offer record, the raw input unit.
struct Bid {
  HourStamp hour;
  Price price;
  double quantity = 0.0;
};

/*!
  A supply curve in the (Price, Quantity) plane: a right-continuous
  non-decreasing step function of price. The value at p is the value of the
  last knot with knot price <= p, and 0 before the first knot; right
  continuity means the curve itself is exactly a sum of unit-step basis
  functions placed at its knots.

  Canonical form: knot prices strictly increasing, every knot a genuine jump
  (values strictly increasing, all positive). A knot-free curve is the
  zero-everywhere function, used as the reconstruction of an all-zero
  coefficient vector.
*/
class StepCurve {
 public:
  struct Knot {
    Price price;
    double value = 0.0;  // cumulative quantity at and beyond this price

    friend bool operator==(const Knot&, const Knot&) = default;
  };

  StepCurve() = default;

  /// Validates canonical form.
  static StepCurve from_knots(std::vector<Knot> knots) {
    double prev_value = 0.0;
    Price prev_price = Price::from_ticks(-1);
    for (const auto& k : knots) {
      if (k.price.is_infinite() || k.price < Price::zero())
        throw Error("knot price must be finite and non-negative");
      if (k.price <= prev_price) throw Error("knot prices must strictly increase");
      if (k.value <= prev_value) throw Error("knot values must strictly increase");
      prev_price = k.price;
      prev_value = k.value;
    }
    StepCurve c;
    c.knots_ = std::move(knots);
    return c;
  }

  const std::vector<Knot>& knots() const { return knots_; }

  bool empty() const { return knots_.empty(); }

  /// Step count n_t.
  std::size_t steps() const { return knots_.size(); }

  /// Right-continuous evaluation: value of the last knot at or below p.
  double value_at(Price p) const {
    auto it = std::upper_bound(
        knots_.begin(), knots_.end(), p,
        [](Price lhs, const Knot& k) { return lhs < k.price; });
    if (it == knots_.begin()) return 0.0;
    return std::prev(it)->value;
  }

  /// Evaluation at a real-valued (non-tick) price, for pointwise sampling.
  double value_at_units(double p_units) const {
    auto it = std::upper_bound(
        knots_.begin(), knots_.end(), p_units,
        [](double lhs, const Knot& k) { return lhs < k.price.units(); });
    if (it == knots_.begin()) return 0.0;
    return std::prev(it)->value;
  }

  /// Total offered quantity (value beyond the last knot).
  double total() const { return knots_.empty() ? 0.0 : knots_.back().value; }

  Price max_price() const {
    return knots_.empty() ? Price::zero() : knots_.back().price;
  }

  friend bool operator==(const StepCurve&, const StepCurve&) = default;

 private:
  std::vector<Knot> knots_;
};

/*!
  Aggregates one hour's bids into a supply curve: sort by price, merge
  equal-price offers by summing quantities, cumulate. All bids must share one
  timestamp and carry positive quantity.
*/
inline StepCurve build_curve(std::span<const Bid> bids) {
  if (bids.empty()) throw Error("empty hour: no bids to aggregate");
  const HourStamp hour = bids.front().hour;
  std::vector<std::pair<Price, double>> offers;
  offers.reserve(bids.size());
  for (const auto& b : bids) {
    if (b.hour != hour) throw Error("mixed hours: bids span several timestamps");
    if (b.price < Price::zero()) throw Error("bid price must be non-negative");
    if (!(b.quantity > 0.0)) throw Error("bid quantity must be positive");
    offers.emplace_back(b.price, b.quantity);
  }
  std::sort(offers.begin(), offers.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<StepCurve::Knot> knots;
  knots.reserve(offers.size());
  double running = 0.0;
  for (std::size_t i = 0; i < offers.size();) {
    const Price p = offers[i].first;
    double q = 0.0;
    while (i < offers.size() && offers[i].first == p) q += offers[i++].second;
    running += q;
    knots.push_back({p, running});
  }
  return StepCurve::from_knots(std::move(knots));
}

/// Sorted union of both knot-price sets plus the price 0, deduplicated. The
/// joint grid on which any pairwise difference of the two curves is constant.
inline std::vector<Price> merge_breakpoints(const StepCurve& a,
                                            const StepCurve& b) {
  std::vector<Price> out;
  out.reserve(a.knots().size() + b.knots().size() + 1);
  out.push_back(Price::zero());
  for (const auto& k : a.knots()) out.push_back(k.price);
  for (const auto& k : b.knots()) out.push_back(k.price);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

/*!
  Visits the constancy segments of `curve` restricted to [from, to) as
  fn(value, lo, hi); `to` may be Price::infinity(). Segment bounds are exact
  tick prices, so downstream integrals never straddle a step.
*/
template <typename Fn>
void for_each_segment(const StepCurve& curve, Price from, Price to, Fn&& fn) {
  if (to <= from) return;
  Price lo = from;
  for (const auto& k : curve.knots()) {
    if (k.price <= lo) continue;
    if (k.price >= to) break;
    fn(curve.value_at(lo), lo, k.price);
    lo = k.price;
  }
  fn(curve.value_at(lo), lo, to);
}

}  // namespace stepfit

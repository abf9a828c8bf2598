#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include <stepfit/curve.hpp>
#include <stepfit/errors.hpp>
#include <stepfit/summation.hpp>
#include <stepfit/weighting.hpp>

namespace stepfit {

/*!
  The ordered price grid {p_1 < p_2 < ... < p_n} with p_1 = 0 at which an
  approximation may step. Two equivalent bases live on a node set:

    phi_i  : unit step, 0 below p_i and 1 from p_i on;
    theta_i: indicator of [p_i, p_{i+1}), with p_{n+1} = +inf.

  theta_i = phi_i - phi_{i+1} for i < n and theta_n = phi_n, so coefficient
  vectors convert by prefix sums / adjacent differences.
*/
class NodeSet {
 public:
  /// The minimal grid {0}.
  NodeSet() : prices_{Price::zero()} {}

  explicit NodeSet(std::vector<Price> prices) : prices_(std::move(prices)) {
    if (prices_.empty()) throw Error("node set needs at least one node");
    if (prices_.front() != Price::zero())
      throw Error("first node must be exactly 0");
    for (std::size_t i = 1; i < prices_.size(); ++i)
      if (prices_[i].is_infinite() || prices_[i] <= prices_[i - 1])
        throw Error("node prices must strictly increase");
  }

  /// Sorts, deduplicates and prepends the mandatory 0.
  static NodeSet from_unsorted(std::vector<Price> prices) {
    prices.push_back(Price::zero());
    std::sort(prices.begin(), prices.end());
    prices.erase(std::unique(prices.begin(), prices.end()), prices.end());
    return NodeSet(std::move(prices));
  }

  std::size_t size() const { return prices_.size(); }
  Price price(std::size_t i) const { return prices_[i]; }
  const std::vector<Price>& prices() const { return prices_; }

  friend bool operator==(const NodeSet&, const NodeSet&) = default;

 private:
  std::vector<Price> prices_;
};

/// A fitted curve on a node set: coefficients in both bases plus the achieved
/// loss. phi coefficients are step heights (non-negative for monotone input),
/// theta coefficients the per-interval levels (non-decreasing).
struct Approximation {
  NodeSet nodes;
  std::vector<double> phi;
  std::vector<double> theta;
  double loss = 0.0;
  double r = 2.0;
  std::vector<std::string> warnings;
};

/// CW_j = int_{p_j}^inf C W dp and W_j = Omega(p_j), the tail integrals the
/// normal equations are written in.
struct WeightedIntegrals {
  std::vector<double> curve_weighted;
  std::vector<double> weight_tail;
};

namespace detail {

/// One basis interval [p_i, p_{i+1}): its exact weight mass, the constancy
/// segments of C inside it, the weighted integral of C over it, and C's value
/// range on it.
struct IntervalDecomp {
  double mass = 0.0;
  double weighted_curve = 0.0;
  double value_lo = 0.0;
  double value_hi = 0.0;
  std::vector<std::pair<double, double>> segments;  // (value, mass)
};

inline std::vector<IntervalDecomp> decompose(const StepCurve& curve,
                                             const NodeSet& nodes,
                                             const WeightSpec& w) {
  const auto& ps = nodes.prices();
  std::vector<IntervalDecomp> out(ps.size());
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const Price lo = ps[i];
    const Price hi = i + 1 < ps.size() ? ps[i + 1] : Price::infinity();
    auto& iv = out[i];
    iv.mass = interval_mass(w, lo, hi);
    NeumaierSum num;
    bool first = true;
    for_each_segment(curve, lo, hi, [&](double value, Price slo, Price shi) {
      const double m = interval_mass(w, slo, shi);
      iv.segments.emplace_back(value, m);
      num.add(value * m);
      if (first) {
        iv.value_lo = value;
        first = false;
      }
      iv.value_hi = value;
    });
    iv.weighted_curve = num.value();
  }
  return out;
}

/// (CW_i - CW_{i+1}) / (W_i - W_{i+1}): the weight-density average of C on
/// interval i, which is the exact L2 minimizer of the separable theta
/// problem. The average is a convex combination of the segment values, so it
/// is clamped into their range; a single-segment interval returns the value
/// itself, keeping exact-span recoveries exact.
inline double interval_average(const IntervalDecomp& iv) {
  if (iv.segments.size() == 1) return iv.segments.front().first;
  return std::clamp(iv.weighted_curve / iv.mass, iv.value_lo, iv.value_hi);
}

struct ThetaLevels {
  std::vector<double> theta;
  bool tail_unweighted = false;
};

constexpr const char* kTailWarning =
    "tail interval [p_n, inf) carries no weight mass; phi coefficient set to 0";

/// Shared interior of project_l2/theta_l2_coeffs: interval averages with the
/// degenerate-interval and unweighted-tail rules applied.
inline ThetaLevels l2_interval_levels(const StepCurve& curve,
                                      const NodeSet& nodes,
                                      const WeightSpec& w) {
  const auto ivs = decompose(curve, nodes, w);
  ThetaLevels out;
  out.theta.resize(ivs.size());
  for (std::size_t i = 0; i < ivs.size(); ++i) {
    if (ivs[i].mass <= 0.0) {
      // Interior intervals must carry mass: a node set that starves one is
      // broken and fitting against it silently would hide that.
      if (i + 1 < ivs.size()) throw DegenerateIntervalError(i + 1);
      // The loss cannot see the last level; minimal-norm choice c_n = 0.
      out.theta[i] = i > 0 ? out.theta[i - 1] : 0.0;
      out.tail_unweighted = true;
    } else {
      out.theta[i] = interval_average(ivs[i]);
    }
  }
  return out;
}

inline double pow_r(double magnitude, double r) {
  if (r == 2.0) return magnitude * magnitude;
  if (r == 1.0) return magnitude;
  return std::pow(magnitude, r);
}

}  // namespace detail

/// Exact tail integrals CW_j and W_j on the node grid. Suffix sums of
/// non-negative per-interval integrals, so both sequences are non-increasing
/// with no cancellation.
inline WeightedIntegrals weighted_integrals(const StepCurve& curve,
                                            const NodeSet& nodes,
                                            const WeightSpec& w) {
  validate(w);
  const auto ivs = detail::decompose(curve, nodes, w);
  WeightedIntegrals out;
  out.curve_weighted.resize(ivs.size());
  out.weight_tail.resize(ivs.size());
  NeumaierSum suffix;
  for (std::size_t i = ivs.size(); i-- > 0;) {
    suffix.add(ivs[i].weighted_curve);
    out.curve_weighted[i] = suffix.value();
  }
  for (std::size_t i = 0; i < ivs.size(); ++i)
    out.weight_tail[i] = tail_mass(w, nodes.price(i));
  return out;
}

/// Rebuilds the fitted step curve Chat = sum c_i phi_i. Knots appear at nodes
/// where the running coefficient sum genuinely increases.
inline StepCurve reconstruct(const Approximation& a) {
  std::vector<StepCurve::Knot> knots;
  NeumaierSum running;
  double last = 0.0;
  for (std::size_t i = 0; i < a.phi.size(); ++i) {
    running.add(a.phi[i]);
    const double v = running.value();
    if (v > last) {
      knots.push_back({a.nodes.price(i), v});
      last = v;
    }
  }
  return StepCurve::from_knots(std::move(knots));
}

/// Exact || A - B ||_r^r under W: the difference is constant between merged
/// breakpoints, so the integral is a finite sum of |delta|^r times interval
/// masses, including the unbounded tail piece.
inline double curve_distance(const StepCurve& a, const StepCurve& b,
                             const WeightSpec& w, double r) {
  const auto bps = merge_breakpoints(a, b);
  NeumaierSum total;
  for (std::size_t k = 0; k < bps.size(); ++k) {
    const Price lo = bps[k];
    const Price hi = k + 1 < bps.size() ? bps[k + 1] : Price::infinity();
    const double delta = a.value_at(lo) - b.value_at(lo);
    if (delta == 0.0) continue;
    const double m = interval_mass(w, lo, hi);
    if (m == 0.0) continue;
    total.add(detail::pow_r(std::abs(delta), r) * m);
  }
  return total.value();
}

/// Exact L_r between a curve and a fitted approximation.
inline double loss(const StepCurve& curve, const Approximation& approx,
                   const WeightSpec& w, double r) {
  return curve_distance(curve, reconstruct(approx), w, r);
}

/*!
  Closed-form weighted-L2 projection onto the phi basis.

  The normal equations in the tail integrals CW_j, W_j solve recursively:

    c_1 = (CW_1 - CW_2) / (W_1 - W_2)
    c_i = (CW_i - CW_{i+1}) / (W_i - W_{i+1}) - (c_1 + ... + c_{i-1})
    c_n = CW_n / W_n - (c_1 + ... + c_{n-1})

  where each ratio is the weighted average of C on one interval, i.e. the
  theta-basis level c*_i; phi coefficients are their adjacent differences.
  Monotonicity of C makes every c_i non-negative, so the fit is itself a
  non-decreasing step curve.

  Errors: an interior interval without weight mass throws
  DegenerateIntervalError (1-based index). A massless tail interval is not an
  error; its coefficient is 0 and a warning is recorded.
*/
inline Approximation project_l2(const StepCurve& curve, const NodeSet& nodes,
                                const WeightSpec& w) {
  validate(w);
  auto levels = detail::l2_interval_levels(curve, nodes, w);
  const std::size_t n = levels.theta.size();
  std::vector<double> phi(n);
  phi[0] = levels.theta[0];
  for (std::size_t i = 1; i < n; ++i)
    phi[i] = levels.theta[i] - levels.theta[i - 1];
  Approximation a{nodes, std::move(phi), std::move(levels.theta), 0.0, 2.0, {}};
  if (levels.tail_unweighted) a.warnings.emplace_back(detail::kTailWarning);
  a.loss = curve_distance(curve, reconstruct(a), w, 2.0);
  return a;
}

/// The theta-basis L2 solution directly from the ratio formula
/// c*_i = (CW_i - CW_{i+1}) / (W_i - W_{i+1}); equals the prefix sums of the
/// phi coefficients.
inline std::vector<double> theta_l2_coeffs(const StepCurve& curve,
                                           const NodeSet& nodes,
                                           const WeightSpec& w) {
  validate(w);
  return detail::l2_interval_levels(curve, nodes, w).theta;
}

namespace detail {

/// Lower weighted median of the interval's segment values: smallest value
/// whose cumulative mass reaches half the total. Exact L1 minimizer; ties
/// resolve to the lower value for determinism.
inline double weighted_median(const std::vector<std::pair<double, double>>& segs,
                              double total_mass) {
  const double half = 0.5 * total_mass;
  double cum = 0.0;
  for (const auto& [value, mass] : segs) {
    cum += mass;
    if (cum >= half) return value;
  }
  return segs.back().first;
}

/// d/dc int |c - C|^r W = r * sum_k sign(c - v_k) |c - v_k|^{r-1} m_k
/// (the constant factor r is irrelevant for root finding).
inline double lr_derivative(const std::vector<std::pair<double, double>>& segs,
                            double c, double r) {
  NeumaierSum d;
  for (const auto& [value, mass] : segs) {
    if (mass == 0.0 || c == value) continue;
    const double diff = c - value;
    const double mag =
        r == 2.0 ? std::abs(diff) : std::pow(std::abs(diff), r - 1.0);
    d.add(diff > 0.0 ? mag * mass : -mag * mass);
  }
  return d.value();
}

/// Minimizes the convex per-interval objective for r > 1 by sign bisection of
/// its exact derivative over the interval's value range. The bracket is never
/// left, so fitted levels inherit the range ordering across intervals and the
/// phi coefficients stay non-negative by construction.
inline double minimize_convex(const IntervalDecomp& iv, double r) {
  double lo = iv.value_lo;
  double hi = iv.value_hi;
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (lr_derivative(iv.segments, mid, r) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

/*!
  General L_r fit on the theta basis. The loss separates over intervals, so
  each level solves an independent scalar problem on the exact piecewise
  objective: the weighted median for r = 1, derivative-sign bisection for
  r > 1 (convex case). r = 2 reproduces project_l2. Exponents in (0, 1) give
  non-convex per-interval problems and are rejected.
*/
inline Approximation fit_lr(const StepCurve& curve, const NodeSet& nodes,
                            const WeightSpec& w, double r) {
  validate(w);
  if (!(r > 0.0)) throw Error("loss exponent r must be positive");
  if (r < 1.0) throw Error("non-convex exponent unsupported: 0 < r < 1");
  const auto ivs = detail::decompose(curve, nodes, w);
  const std::size_t n = ivs.size();
  std::vector<double> theta(n);
  bool tail_unweighted = false;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& iv = ivs[i];
    if (iv.mass <= 0.0) {
      if (i + 1 < n) throw DegenerateIntervalError(i + 1);
      theta[i] = i > 0 ? theta[i - 1] : 0.0;
      tail_unweighted = true;
    } else if (iv.segments.size() == 1) {
      theta[i] = iv.segments.front().first;
    } else if (r == 1.0) {
      theta[i] = detail::weighted_median(iv.segments, iv.mass);
    } else {
      theta[i] = detail::minimize_convex(iv, r);
    }
  }
  std::vector<double> phi(n);
  phi[0] = theta[0];
  for (std::size_t i = 1; i < n; ++i) phi[i] = theta[i] - theta[i - 1];
  Approximation a{nodes, std::move(phi), std::move(theta), 0.0, r, {}};
  if (tail_unweighted) a.warnings.emplace_back(detail::kTailWarning);
  a.loss = curve_distance(curve, reconstruct(a), w, r);
  return a;
}

/// Fits with the closed form when it exists, the computational path otherwise.
inline Approximation fit(const StepCurve& curve, const NodeSet& nodes,
                         const WeightSpec& w, double r) {
  return r == 2.0 ? project_l2(curve, nodes, w) : fit_lr(curve, nodes, w, r);
}

}  // namespace stepfit

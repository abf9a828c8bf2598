#pragma once

#include <algorithm>
#include <cstdint>
#include <utility>
#include <variant>
#include <vector>

#include <stepfit/errors.hpp>
#include <stepfit/evaluation.hpp>
#include <stepfit/price.hpp>
#include <stepfit/projection.hpp>
#include <stepfit/rng.hpp>

namespace stepfit {

/// Node prices come from the empirical distribution of all observed bid
/// prices in the training sample.
struct MarginalEmpirical {
  std::vector<Price> prices;  // multiset, any order
};

/// Node prices come from the price distribution conditional on bid quantity
/// >= min_quantity; coincides with the marginal distribution at threshold 0.
struct ConditionalEmpirical {
  std::vector<std::pair<Price, double>> bids;  // (price, quantity)
  double min_quantity = 0.0;
};

/// Equally spaced nodes on [0, p_max], the baseline method.
struct UniformGrid {
  Price p_max;
};

using ReferenceDistribution =
    std::variant<MarginalEmpirical, ConditionalEmpirical, UniformGrid>;

namespace detail {

inline std::vector<Price> sorted_support(const ReferenceDistribution& dist) {
  std::vector<Price> prices;
  if (const auto* m = std::get_if<MarginalEmpirical>(&dist)) {
    prices = m->prices;
  } else if (const auto* c = std::get_if<ConditionalEmpirical>(&dist)) {
    for (const auto& [p, q] : c->bids)
      if (q >= c->min_quantity) prices.push_back(p);
  } else {
    throw Error("uniform grid has no empirical support");
  }
  if (prices.empty()) throw Error("empty reference distribution");
  std::sort(prices.begin(), prices.end());
  return prices;
}

}  // namespace detail

/*!
  Deterministic size-n node sample from a reference distribution F: the
  equiprobable grid p_i = F^{-1}((i - 1/2) / n), i = 1..n, using the
  left-continuous inverse (smallest observed price with ECDF >= u). The
  mandatory node 0 is prepended and duplicates collapse, so the result may
  hold fewer than n + 1 prices. The uniform variant is the equally spaced
  grid with n points including both ends.
*/
inline NodeSet quantile_nodes(const ReferenceDistribution& dist, std::size_t n) {
  if (n < 1) throw Error("node sample size must be at least 1");
  std::vector<Price> picks;
  picks.reserve(n);
  if (const auto* u = std::get_if<UniformGrid>(&dist)) {
    validate(WeightSpec{UniformWeight{u->p_max}});  // same p_max > 0 rule
    for (std::size_t i = 0; i < n; ++i) {
      const double frac =
          n == 1 ? 0.0
                 : static_cast<double>(i) / static_cast<double>(n - 1);
      picks.push_back(Price::from_units(u->p_max.units() * frac));
    }
  } else {
    const auto prices = detail::sorted_support(dist);
    const auto count = static_cast<std::int64_t>(prices.size());
    for (std::size_t i = 1; i <= n; ++i) {
      // ceil((2i-1) * N / (2n)) in exact integer arithmetic.
      const std::int64_t numer = static_cast<std::int64_t>(2 * i - 1) * count;
      const std::int64_t denom = static_cast<std::int64_t>(2 * n);
      const std::int64_t rank = (numer + denom - 1) / denom;
      picks.push_back(prices[static_cast<std::size_t>(std::max<std::int64_t>(
          rank - 1, 0))]);
    }
  }
  return NodeSet::from_unsorted(std::move(picks));
}

/// Literal-sampling alternative: n i.i.d. draws from F (then sort, prepend 0,
/// dedup). Provided for completeness; the deterministic quantile grid is the
/// default everywhere.
inline NodeSet random_nodes(const ReferenceDistribution& dist, std::size_t n,
                            SplitMix64& rng) {
  if (n < 1) throw Error("node sample size must be at least 1");
  std::vector<Price> picks;
  picks.reserve(n);
  if (const auto* u = std::get_if<UniformGrid>(&dist)) {
    for (std::size_t i = 0; i < n; ++i)
      picks.push_back(Price::from_units(rng.next_in(0.0, u->p_max.units())));
  } else {
    const auto prices = detail::sorted_support(dist);
    for (std::size_t i = 0; i < n; ++i)
      picks.push_back(prices[rng.next_below(prices.size())]);
  }
  return NodeSet::from_unsorted(std::move(picks));
}

/// Type-1 empirical quantile of the bid quantities: smallest value whose ECDF
/// reaches `level`. level = 0.75 gives the conditional-distribution threshold.
inline double conditional_threshold(std::span<const double> quantities,
                                    double level) {
  if (quantities.empty()) throw Error("empty quantity sample");
  if (!(level > 0.0 && level < 1.0))
    throw Error("quantile level must lie in (0, 1)");
  std::vector<double> sorted(quantities.begin(), quantities.end());
  std::sort(sorted.begin(), sorted.end());
  const double target = level * static_cast<double>(sorted.size());
  auto rank = static_cast<std::int64_t>(std::ceil(target - 1e-9));
  rank = std::clamp<std::int64_t>(rank, 1,
                                  static_cast<std::int64_t>(sorted.size()));
  return sorted[static_cast<std::size_t>(rank - 1)];
}

enum class SampleMode { quantile, random };

enum class SelectionStatus { converged, cap_reached };

/// One record per tried node-set size, plus how the loop ended.
struct SelectionTrace {
  struct Record {
    std::size_t n = 0;
    double mean_approx_error = 0.0;
    double mean_prediction_error = 0.0;
  };
  std::vector<Record> records;
  SelectionStatus status = SelectionStatus::cap_reached;
};

struct SelectionResult {
  NodeSet nodes;
  SelectionTrace trace;
};

/*!
  The iterative node-count selection loop:

    1. compute the mean naive prediction error P-bar over the training panel
       (once);
    2. for n = n_start, n_start + step, ...: draw nodes from the reference
       distribution, compute the mean approximation error L-bar over the
       training curves, record the pair;
    3. stop at the first n with L-bar < P-bar.

  Hitting n_cap without success returns the best (lowest L-bar) grid seen and
  a cap_reached status. Projection errors propagate with the offending n
  attached.
*/
inline SelectionResult select_nodes(const CurvePanel& training,
                                    const WeightSpec& w, double r,
                                    const ReferenceDistribution& dist,
                                    std::size_t n_start, std::size_t n_cap,
                                    std::size_t step = 1,
                                    SampleMode mode = SampleMode::quantile,
                                    std::uint64_t seed = 0,
                                    unsigned threads = 1) {
  if (n_start < 1 || n_cap < n_start) throw Error("invalid node-count range");
  if (step < 1) throw Error("node-count step must be at least 1");
  const auto curves = training.training_curves();
  if (curves.size() <= 24)
    throw Error("training set must span more than 24 hourly slots");
  const double prediction_bar = mean_prediction_error(training, w, r).mean;
  SplitMix64 rng(seed);

  SelectionTrace trace;
  std::optional<NodeSet> best;
  double best_error = 0.0;
  for (std::size_t n = n_start; n <= n_cap; n += step) {
    NodeSet nodes = mode == SampleMode::quantile ? quantile_nodes(dist, n)
                                                 : random_nodes(dist, n, rng);
    double approx_bar = 0.0;
    try {
      approx_bar = mean_approx_error(curves, nodes, w, r, threads);
    } catch (const DegenerateIntervalError& e) {
      throw DegenerateIntervalError(e.interval,
                                    " at node count n=" + std::to_string(n));
    }
    trace.records.push_back({n, approx_bar, prediction_bar});
    if (!best || approx_bar < best_error) {
      best = nodes;
      best_error = approx_bar;
    }
    if (approx_bar < prediction_bar) {
      trace.status = SelectionStatus::converged;
      return {std::move(nodes), std::move(trace)};
    }
  }
  trace.status = SelectionStatus::cap_reached;
  return {std::move(*best), std::move(trace)};
}

}  // namespace stepfit

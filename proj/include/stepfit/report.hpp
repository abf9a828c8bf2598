#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <stepfit/errors.hpp>
#include <stepfit/evaluation.hpp>
#include <stepfit/node_selection.hpp>

namespace stepfit {

/// Node-generation method of one report row.
enum class Method { marginal, conditional, uniform };

inline std::string_view method_name(Method m) {
  switch (m) {
    case Method::marginal: return "marginal";
    case Method::conditional: return "conditional";
    case Method::uniform: return "uniform";
  }
  throw Error("unknown method");
}

inline Method parse_method(std::string_view name) {
  if (name == "marginal") return Method::marginal;
  if (name == "conditional") return Method::conditional;
  if (name == "uniform") return Method::uniform;
  throw ParseError("unknown node method: '" + std::string(name) + "'");
}

/// Method x node-count error table plus the naive baseline, all on the scaled
/// panel.
struct ErrorReport {
  struct Row {
    Method method = Method::marginal;
    std::size_t nodes = 0;
    double mscape = 0.0;
  };
  std::vector<Row> rows;
  double naive_mscape = 0.0;
  double scale = 1.0;
};

/// Observed (price, quantity) pairs of the training window, read off the
/// curve knots (a knot's jump is the merged quantity offered at its price).
inline std::vector<std::pair<Price, double>> training_bid_pairs(
    const CurvePanel& panel) {
  std::vector<std::pair<Price, double>> out;
  for (const auto& [t, c] : panel.curves) {
    if (!panel.in_training(t)) continue;
    double prev = 0.0;
    for (const auto& k : c.knots()) {
      out.emplace_back(k.price, k.value - prev);
      prev = k.value;
    }
  }
  if (out.empty()) throw Error("no training bids in panel");
  return out;
}

/// Builds the reference distribution a method needs from the training window.
inline ReferenceDistribution make_distribution(const CurvePanel& panel,
                                               Method method,
                                               double q_level = 0.75) {
  switch (method) {
    case Method::uniform:
      return UniformGrid{panel.max_training_price()};
    case Method::marginal: {
      std::vector<Price> prices;
      for (auto& [p, q] : training_bid_pairs(panel)) prices.push_back(p);
      return MarginalEmpirical{std::move(prices)};
    }
    case Method::conditional: {
      auto bids = training_bid_pairs(panel);
      std::vector<double> quantities;
      quantities.reserve(bids.size());
      for (auto& [p, q] : bids) quantities.push_back(q);
      const double threshold =
          q_level == 0.0 ? 0.0 : conditional_threshold(quantities, q_level);
      return ConditionalEmpirical{std::move(bids), threshold};
    }
  }
  throw Error("unknown method");
}

/*!
  The comparison table: for every method and node count, nodes are drawn from
  the training window of the scaled panel and the mean scaled approximation
  error is evaluated on its test curves; the naive previous-day baseline on
  the same test window anchors the comparison.
*/
inline ErrorReport comparison_report(const ScaledPanel& scaled,
                                     const std::vector<Method>& methods,
                                     const std::vector<std::size_t>& node_counts,
                                     const WeightSpec& w, double r,
                                     double q_level = 0.75,
                                     unsigned threads = 1) {
  const auto test = scaled.panel.test_curves();
  if (test.empty()) throw Error("panel has no test window");
  ErrorReport report;
  report.scale = scaled.scale;
  report.naive_mscape =
      mean_naive_error(scaled.panel, Window::test, w, r).mean;
  for (const Method method : methods) {
    const auto dist = make_distribution(scaled.panel, method, q_level);
    for (const std::size_t n : node_counts) {
      const NodeSet nodes = quantile_nodes(dist, n);
      report.rows.push_back(
          {method, n, mean_approx_error(test, nodes, w, r, threads)});
    }
  }
  return report;
}

}  // namespace stepfit

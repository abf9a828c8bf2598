#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <stepfit/curve.hpp>
#include <stepfit/errors.hpp>
#include <stepfit/evaluation.hpp>
#include <stepfit/node_selection.hpp>
#include <stepfit/projection.hpp>
#include <stepfit/report.hpp>
#include <stepfit/rng.hpp>

namespace stepfit {

namespace detail {

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string format_sig6(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

inline double parse_double(std::string_view text, std::size_t line) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, v);
  if (res.ec != std::errc{} || res.ptr != end || !std::isfinite(v))
    throw ParseError("invalid number: '" + std::string(text) + "'", line);
  return v;
}

inline std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

inline std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return in;
}

inline std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  return out;
}

/// Reads one line, dropping a trailing '\r' from CRLF input.
inline bool next_line(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

inline void expect_header(const std::string& got, std::string_view want,
                          const std::filesystem::path& path) {
  if (got != want)
    throw ParseError("'" + path.string() + "': expected header '" +
                     std::string(want) + "', got '" + got + "'");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Bid files: header `timestamp,price,quantity`, ISO-8601 hour stamps, '.'
// decimal separator.
// ---------------------------------------------------------------------------

inline void write_bids(const std::filesystem::path& path,
                       std::span<const Bid> bids) {
  auto out = detail::open_output(path);
  out << "timestamp,price,quantity\n";
  char buf[32];
  for (const auto& b : bids) {
    std::snprintf(buf, sizeof(buf), "%.4f", b.quantity);
    out << format_hour(b.hour) << ',' << format_price(b.price) << ',' << buf
        << '\n';
  }
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

inline CurvePanel panel_from_bids(std::span<const Bid> bids) {
  std::map<HourStamp, std::vector<Bid>> by_hour;
  for (const auto& b : bids) by_hour[b.hour].push_back(b);
  if (by_hour.empty()) throw Error("no bids to build a panel from");
  CurvePanel panel;
  for (auto& [hour, hour_bids] : by_hour)
    panel.curves.emplace(hour, build_curve(hour_bids));
  panel.train_end = by_hour.rbegin()->first + 1;  // everything trains by default
  return panel;
}

inline CurvePanel read_bids(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  std::string line;
  if (!detail::next_line(in, line))
    throw ParseError("'" + path.string() + "' is empty");
  detail::expect_header(line, "timestamp,price,quantity", path);
  std::vector<Bid> bids;
  std::size_t lineno = 1;
  while (detail::next_line(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto fields = detail::split_csv(line);
    if (fields.size() != 3)
      throw ParseError("expected 3 fields, got " + std::to_string(fields.size()),
                       lineno);
    Bid b;
    b.hour = parse_hour(fields[0], lineno);
    b.price = parse_price(fields[1], lineno);
    b.quantity = detail::parse_double(fields[2], lineno);
    if (!(b.quantity > 0.0))
      throw ParseError("quantity must be positive, got '" +
                           std::string(fields[2]) + "'",
                       lineno);
    bids.push_back(b);
  }
  if (bids.empty()) throw ParseError("'" + path.string() + "' has no bid rows");
  return panel_from_bids(bids);
}

// ---------------------------------------------------------------------------
// Synthetic market data.
// ---------------------------------------------------------------------------

/// One component of the bid-price mixture, uniform on [lo, hi] in price units.
struct MixtureComponent {
  double weight = 1.0;
  double lo = 0.0;
  double hi = 100.0;
};

/*!
  Deterministic synthetic market: each hour of the day gets a base bid list
  drawn from the price mixture, and every calendar day re-jitters that list,
  so consecutive days are similar but never equal (unless perturbation = 0).
  All randomness flows from SplitMix64 streams derived from `seed`, making the
  output bit-identical across runs and platforms.
*/
struct SyntheticSpec {
  std::uint64_t seed = 1;
  std::size_t days = 40;
  std::size_t hours_per_day = 24;
  std::size_t bids_per_hour_min = 30;
  std::size_t bids_per_hour_max = 60;
  /// Default mirrors a market whose prices concentrate low with a sparse
  /// expensive tail.
  std::vector<MixtureComponent> price_mixture{{0.85, 0.0, 100.0},
                                              {0.15, 100.0, 300.0}};
  double quantity_min = 1.0;
  double quantity_max = 50.0;
  /// Day-to-day price jitter amplitude in price units; quantities jitter
  /// relatively at 2% of this. Zero makes all days identical.
  double perturbation = 2.0;
  HourStamp start = HourStamp::from_civil(2016, 1, 1, 0);

  void validate() const {
    if (days < 1 || hours_per_day < 1 || hours_per_day > 24)
      throw Error("synthetic spec: bad calendar dimensions");
    if (bids_per_hour_min < 1 || bids_per_hour_max < bids_per_hour_min)
      throw Error("synthetic spec: bad bids-per-hour range");
    if (price_mixture.empty()) throw Error("synthetic spec: empty mixture");
    double total = 0.0;
    for (const auto& c : price_mixture) {
      if (!(c.weight > 0.0) || c.lo < 0.0 || c.hi <= c.lo)
        throw Error("synthetic spec: bad mixture component");
      total += c.weight;
    }
    if (std::abs(total - 1.0) > 1e-9)
      throw Error("synthetic spec: mixture weights must sum to 1");
    if (!(quantity_min > 0.0) || quantity_max < quantity_min)
      throw Error("synthetic spec: bad quantity range");
    if (perturbation < 0.0) throw Error("synthetic spec: negative perturbation");
  }
};

inline std::vector<Bid> synthetic_bids(const SyntheticSpec& spec) {
  spec.validate();
  std::vector<Bid> bids;
  for (std::size_t h = 0; h < spec.hours_per_day; ++h) {
    SplitMix64 base_rng(derive_seed(spec.seed, 1000 + h));
    const std::size_t count =
        spec.bids_per_hour_min +
        base_rng.next_below(spec.bids_per_hour_max - spec.bids_per_hour_min + 1);
    std::vector<std::pair<double, double>> base(count);  // (price, quantity)
    for (auto& [price, quantity] : base) {
      const double u = base_rng.next_unit();
      double cum = 0.0;
      const MixtureComponent* chosen = &spec.price_mixture.back();
      for (const auto& c : spec.price_mixture) {
        cum += c.weight;
        if (u < cum) {
          chosen = &c;
          break;
        }
      }
      price = base_rng.next_in(chosen->lo, chosen->hi);
      quantity = base_rng.next_in(spec.quantity_min, spec.quantity_max);
    }
    for (std::size_t d = 0; d < spec.days; ++d) {
      SplitMix64 jitter(derive_seed(spec.seed, (d + 1) * 100000 + h));
      const HourStamp hour =
          spec.start + static_cast<std::int64_t>(d * 24 + h);
      for (const auto& [price, quantity] : base) {
        const double dp = spec.perturbation * (2.0 * jitter.next_unit() - 1.0);
        const double dq =
            1.0 + 0.02 * spec.perturbation * (2.0 * jitter.next_unit() - 1.0);
        Bid b;
        b.hour = hour;
        b.price = Price::from_units(std::max(price + dp, 0.0));
        b.quantity =
            std::max(std::round(quantity * dq * 1e4) / 1e4, 1e-4);
        bids.push_back(b);
      }
    }
  }
  return bids;
}

inline CurvePanel generate_synthetic(const SyntheticSpec& spec) {
  return panel_from_bids(synthetic_bids(spec));
}

// ---------------------------------------------------------------------------
// Curve, node-set, approximation, trace and report artifacts.
// ---------------------------------------------------------------------------

inline void write_curves(const std::filesystem::path& path,
                         const CurvePanel& panel) {
  auto out = detail::open_output(path);
  out << "timestamp,price,value\n";
  for (const auto& [hour, curve] : panel.curves)
    for (const auto& k : curve.knots())
      out << format_hour(hour) << ',' << format_price(k.price) << ','
          << detail::format_double(k.value) << '\n';
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

inline void write_nodes(const std::filesystem::path& path, const NodeSet& nodes) {
  auto out = detail::open_output(path);
  out << "node\n";
  for (const Price p : nodes.prices()) out << format_price(p) << '\n';
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

inline NodeSet read_nodes(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  std::string line;
  if (!detail::next_line(in, line))
    throw ParseError("'" + path.string() + "' is empty");
  detail::expect_header(line, "node", path);
  std::vector<Price> prices;
  std::size_t lineno = 1;
  while (detail::next_line(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    prices.push_back(parse_price(line, lineno));
  }
  if (prices.empty()) throw ParseError("'" + path.string() + "' has no nodes");
  return NodeSet(std::move(prices));
}

inline void write_approximation(const std::filesystem::path& path,
                                const Approximation& a) {
  auto out = detail::open_output(path);
  out << "# r=" << detail::format_double(a.r) << '\n';
  out << "# loss=" << detail::format_double(a.loss) << '\n';
  out << "node,phi,theta\n";
  for (std::size_t i = 0; i < a.nodes.size(); ++i)
    out << format_price(a.nodes.price(i)) << ','
        << detail::format_double(a.phi[i]) << ','
        << detail::format_double(a.theta[i]) << '\n';
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

inline Approximation read_approximation(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  std::string line;
  double r = 2.0;
  double loss_value = 0.0;
  bool saw_r = false;
  bool saw_loss = false;
  std::size_t lineno = 0;
  while (detail::next_line(in, line)) {
    ++lineno;
    if (line.rfind("# r=", 0) == 0) {
      r = detail::parse_double(std::string_view(line).substr(4), lineno);
      saw_r = true;
    } else if (line.rfind("# loss=", 0) == 0) {
      loss_value = detail::parse_double(std::string_view(line).substr(7), lineno);
      saw_loss = true;
    } else {
      break;
    }
  }
  if (!saw_r || !saw_loss)
    throw ParseError("'" + path.string() + "': missing # r= / # loss= lines");
  detail::expect_header(line, "node,phi,theta", path);
  std::vector<Price> prices;
  std::vector<double> phi, theta;
  while (detail::next_line(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto fields = detail::split_csv(line);
    if (fields.size() != 3) throw ParseError("expected 3 fields", lineno);
    prices.push_back(parse_price(fields[0], lineno));
    phi.push_back(detail::parse_double(fields[1], lineno));
    theta.push_back(detail::parse_double(fields[2], lineno));
  }
  if (prices.empty()) throw ParseError("'" + path.string() + "' has no rows");
  return Approximation{NodeSet(std::move(prices)), std::move(phi),
                       std::move(theta), loss_value, r, {}};
}

inline void write_trace(const std::filesystem::path& path,
                        const SelectionTrace& trace) {
  auto out = detail::open_output(path);
  out << "# status="
      << (trace.status == SelectionStatus::converged ? "converged"
                                                     : "cap-reached")
      << '\n';
  out << "n,mean_approx_error,mean_prediction_error\n";
  for (const auto& rec : trace.records)
    out << rec.n << ',' << detail::format_double(rec.mean_approx_error) << ','
        << detail::format_double(rec.mean_prediction_error) << '\n';
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

/// Report CSV prints error values times 1000 at 6 significant digits, the
/// usual "1000 x MScApE" table convention.
inline void write_report(const std::filesystem::path& path,
                         const ErrorReport& report) {
  auto out = detail::open_output(path);
  out << "# naive_mscape=" << detail::format_sig6(report.naive_mscape * 1e3)
      << '\n';
  out << "# scale=" << detail::format_double(report.scale) << '\n';
  out << "method,n,mscape\n";
  for (const auto& row : report.rows)
    out << method_name(row.method) << ',' << row.nodes << ','
        << detail::format_sig6(row.mscape * 1e3) << '\n';
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

inline ErrorReport read_report(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  std::string line;
  ErrorReport report;
  bool saw_naive = false;
  bool saw_scale = false;
  std::size_t lineno = 0;
  while (detail::next_line(in, line)) {
    ++lineno;
    if (line.rfind("# naive_mscape=", 0) == 0) {
      report.naive_mscape =
          detail::parse_double(std::string_view(line).substr(15), lineno) / 1e3;
      saw_naive = true;
    } else if (line.rfind("# scale=", 0) == 0) {
      report.scale = detail::parse_double(std::string_view(line).substr(8), lineno);
      saw_scale = true;
    } else {
      break;
    }
  }
  if (!saw_naive || !saw_scale)
    throw ParseError("'" + path.string() + "': missing report comment lines");
  detail::expect_header(line, "method,n,mscape", path);
  while (detail::next_line(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto fields = detail::split_csv(line);
    if (fields.size() != 3) throw ParseError("expected 3 fields", lineno);
    ErrorReport::Row row;
    row.method = parse_method(fields[0]);
    row.nodes = static_cast<std::size_t>(
        detail::parse_double(fields[1], lineno));
    row.mscape = detail::parse_double(fields[2], lineno) / 1e3;
    report.rows.push_back(row);
  }
  return report;
}

// ---------------------------------------------------------------------------
// Plot data: polylines and ECDFs as plain CSV, no rendering.
// ---------------------------------------------------------------------------

/// Step-curve polyline with points doubled at jumps, ready for a line plot.
inline void write_curve_polyline(const std::filesystem::path& path,
                                 const StepCurve& curve) {
  auto out = detail::open_output(path);
  out << "price,value\n";
  double prev = 0.0;
  bool first = true;
  for (const auto& k : curve.knots()) {
    if (first && k.price > Price::zero())
      out << "0," << detail::format_double(0.0) << '\n';
    first = false;
    out << format_price(k.price) << ',' << detail::format_double(prev) << '\n';
    out << format_price(k.price) << ',' << detail::format_double(k.value) << '\n';
    prev = k.value;
  }
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

/// Empirical CDF staircase of a price multiset, points doubled at jumps.
inline void write_ecdf(const std::filesystem::path& path,
                       std::vector<Price> prices) {
  if (prices.empty()) throw Error("empty price sample for ECDF");
  std::sort(prices.begin(), prices.end());
  auto out = detail::open_output(path);
  out << "price,cdf\n";
  const double n = static_cast<double>(prices.size());
  std::size_t i = 0;
  while (i < prices.size()) {
    const Price p = prices[i];
    std::size_t j = i;
    while (j < prices.size() && prices[j] == p) ++j;
    out << format_price(p) << ','
        << detail::format_double(static_cast<double>(i) / n) << '\n';
    out << format_price(p) << ','
        << detail::format_double(static_cast<double>(j) / n) << '\n';
    i = j;
  }
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

}  // namespace stepfit

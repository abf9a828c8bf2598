// stepfit: batch front end for supply-curve step-basis approximation.

#include <CLI11.hpp>

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <stepfit/stepfit.hpp>

namespace {

using namespace stepfit;

// Exit codes, also documented in --help.
constexpr int kExitIo = 3;
constexpr int kExitParse = 4;
constexpr int kExitNoNaivePairs = 5;
constexpr int kExitDegenerate = 6;
constexpr int kExitDomain = 7;

constexpr const char* kFooter =
    "Exit codes:\n"
    "  0  success\n"
    "  3  file I/O failure\n"
    "  4  malformed input (CSV rows, prices, timestamps)\n"
    "  5  no-naive-pairs: no (t, t-24h) pair in the window\n"
    "  6  degenerate interval: a node interval carries no weight mass\n"
    "  7  other domain error\n"
    "  (flag errors use the parser's own nonzero codes)\n";

struct CommonOpts {
  std::string weight = "uniform:auto";
  double r = 2.0;
  unsigned threads = 0;  // 0 = machine parallelism
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--weight", opts.weight,
                  "Weight function: exp:<rate> | uniform:<p_max> | uniform:auto")
      ->capture_default_str();
  cmd->add_option("--r", opts.r, "Loss exponent r (>= 1; 2 = closed form)")
      ->capture_default_str();
  cmd->add_option("--threads", opts.threads,
                  "Worker threads (0 = machine parallelism); results are "
                  "byte-identical for any value")
      ->capture_default_str();
}

/// Applies --train-days: hours from the first stamp up to first + 24*days are
/// training. days = 0 leaves the whole panel in training.
void apply_train_days(CurvePanel& panel, std::size_t days) {
  if (days == 0) return;
  const HourStamp first = panel.curves.begin()->first;
  panel.train_end = first + static_cast<std::int64_t>(days) * 24;
}

WeightSpec resolve_weight(const std::string& text, const CurvePanel& panel) {
  return parse_weight_option(text).resolve(panel.max_training_price());
}

std::vector<std::size_t> parse_count_list(const std::string& text) {
  std::vector<std::size_t> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto field = text.substr(
        start, comma == std::string::npos ? std::string::npos : comma - start);
    unsigned long v = 0;
    const char* end = field.data() + field.size();
    const auto res = std::from_chars(field.data(), end, v);
    if (res.ec != std::errc{} || res.ptr != end || v < 1)
      throw ParseError("invalid node count: '" + field + "'");
    out.push_back(v);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (out.empty()) throw ParseError("empty count list");
  return out;
}

NodeSet parse_node_list(const std::string& text) {
  std::vector<Price> prices;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto field = text.substr(
        start, comma == std::string::npos ? std::string::npos : comma - start);
    prices.push_back(parse_price(field));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return NodeSet::from_unsorted(std::move(prices));
}

// ---------------------------------------------------------------------------

struct SynthOpts {
  std::uint64_t seed = 1;
  std::size_t days = 40;
  std::size_t hours = 24;
  std::size_t bids_min = 30;
  std::size_t bids_max = 60;
  double perturb = 2.0;
  double bulk_max = 100.0;
  double tail_max = 300.0;
  double tail_weight = 0.15;
  double q_min = 1.0;
  double q_max = 50.0;
  std::string out;
};

void run_synth(const SynthOpts& o) {
  SyntheticSpec spec;
  spec.seed = o.seed;
  spec.days = o.days;
  spec.hours_per_day = o.hours;
  spec.bids_per_hour_min = o.bids_min;
  spec.bids_per_hour_max = o.bids_max;
  spec.perturbation = o.perturb;
  spec.quantity_min = o.q_min;
  spec.quantity_max = o.q_max;
  spec.price_mixture = {{1.0 - o.tail_weight, 0.0, o.bulk_max},
                        {o.tail_weight, o.bulk_max, o.tail_max}};
  const auto bids = synthetic_bids(spec);
  write_bids(o.out, bids);
  std::printf("wrote %zu bids (%zu days) to %s\n", bids.size(), o.days,
              o.out.c_str());
}

struct BuildCurvesOpts {
  std::string in, out;
};

void run_build_curves(const BuildCurvesOpts& o) {
  const auto panel = read_bids(o.in);
  write_curves(o.out, panel);
  std::printf("wrote %zu curves to %s\n", panel.curves.size(), o.out.c_str());
}

struct ApproximateOpts {
  std::string in, out;
  std::string nodes_list;
  std::string nodes_file;
  bool verify = false;
  CommonOpts common;
};

void run_approximate(const ApproximateOpts& o) {
  const auto panel = read_bids(o.in);
  const NodeSet nodes = !o.nodes_file.empty() ? read_nodes(o.nodes_file)
                                              : parse_node_list(o.nodes_list);
  const WeightSpec w = resolve_weight(o.common.weight, panel);

  std::vector<const StepCurve*> curves;
  std::vector<HourStamp> hours;
  for (const auto& [t, c] : panel.curves) {
    hours.push_back(t);
    curves.push_back(&c);
  }
  std::vector<Approximation> fits(curves.size());
  parallel_for(curves.size(), o.common.threads, [&](std::size_t i) {
    fits[i] = fit(*curves[i], nodes, w, o.common.r);
  });

  auto out = stepfit::detail::open_output(o.out);
  out << "timestamp,node,phi,theta,loss\n";
  for (std::size_t i = 0; i < fits.size(); ++i) {
    const auto& a = fits[i];
    for (std::size_t j = 0; j < a.nodes.size(); ++j)
      out << format_hour(hours[i]) << ',' << format_price(a.nodes.price(j))
          << ',' << stepfit::detail::format_double(a.phi[j]) << ','
          << stepfit::detail::format_double(a.theta[j]) << ','
          << stepfit::detail::format_double(a.loss) << '\n';
  }
  if (!out) throw IoError("failed writing '" + o.out + "'");

  if (o.verify) {
    double max_dev = 0.0;
    for (std::size_t i = 0; i < fits.size(); ++i) {
      const double oracle =
          riemann_loss(*curves[i], reconstruct(fits[i]), w, o.common.r);
      const double denom = std::max({std::abs(oracle), std::abs(fits[i].loss), 1e-12});
      max_dev = std::max(max_dev, std::abs(oracle - fits[i].loss) / denom);
    }
    std::printf("max relative oracle deviation: %.3g\n", max_dev);
  }
  std::printf("approximated %zu curves on %zu nodes -> %s\n", fits.size(),
              nodes.size(), o.out.c_str());
}

struct SelectOpts {
  std::string in, out, trace;
  std::string dist = "marginal";
  double q_level = 0.75;
  std::size_t train_days = 0;
  std::size_t n_start = 1;
  std::size_t n_cap = 512;
  std::size_t step = 1;
  std::string sample = "quantile";
  std::uint64_t seed = 0;
  CommonOpts common;
};

void run_select(const SelectOpts& o) {
  auto panel = read_bids(o.in);
  apply_train_days(panel, o.train_days);
  const WeightSpec w = resolve_weight(o.common.weight, panel);
  const auto dist = make_distribution(panel, parse_method(o.dist), o.q_level);
  const auto mode =
      o.sample == "random" ? SampleMode::random : SampleMode::quantile;
  const auto result = select_nodes(panel, w, o.common.r, dist, o.n_start,
                                   o.n_cap, o.step, mode, o.seed,
                                   o.common.threads);
  if (!o.out.empty()) write_nodes(o.out, result.nodes);
  if (!o.trace.empty()) write_trace(o.trace, result.trace);
  const auto& last = result.trace.records.back();
  std::printf("%s at n=%zu (%zu nodes): mean approx error %.6g vs naive %.6g\n",
              result.trace.status == SelectionStatus::converged ? "converged"
                                                                : "cap-reached",
              last.n, result.nodes.size(), last.mean_approx_error,
              last.mean_prediction_error);
}

struct EvaluateOpts {
  std::string in, out;
  std::size_t train_days = 0;
  CommonOpts common;
};

void run_evaluate(const EvaluateOpts& o) {
  auto panel = read_bids(o.in);
  apply_train_days(panel, o.train_days);
  const WeightSpec w = resolve_weight(o.common.weight, panel);
  const auto stats = mean_prediction_error(panel, w, o.common.r);
  std::string text = "metric,value\n";
  text += "mean_naive_error," +
          stepfit::detail::format_double(stats.mean) + "\n";
  text += "pairs," + std::to_string(stats.pairs) + "\n";
  text += "skipped," + std::to_string(stats.skipped) + "\n";
  if (o.out.empty()) {
    std::fputs(text.c_str(), stdout);
  } else {
    auto out = stepfit::detail::open_output(o.out);
    out << text;
    if (!out) throw IoError("failed writing '" + o.out + "'");
  }
}

struct ReportOpts {
  std::string in, out;
  std::size_t train_days = 0;
  std::string methods = "marginal,conditional,uniform";
  std::string nodes = "5,10,15,20";
  double q_level = 0.75;
  CommonOpts common;
};

void run_report(const ReportOpts& o) {
  auto panel = read_bids(o.in);
  apply_train_days(panel, o.train_days);
  const auto scaled = scale_panel(panel);
  const WeightSpec w = resolve_weight(o.common.weight, scaled.panel);
  std::vector<Method> methods;
  std::size_t start = 0;
  while (start <= o.methods.size()) {
    const auto comma = o.methods.find(',', start);
    methods.push_back(parse_method(o.methods.substr(
        start, comma == std::string::npos ? std::string::npos : comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  const auto counts = parse_count_list(o.nodes);
  const auto report = comparison_report(scaled, methods, counts, w, o.common.r,
                                        o.q_level, o.common.threads);
  write_report(o.out, report);
  std::printf("wrote %zu rows (naive mscape x1000 = %.6g) to %s\n",
              report.rows.size(), report.naive_mscape * 1e3, o.out.c_str());
}

struct PlotOpts {
  std::string in, out;
  std::string what = "curve";
  std::string hour;
  std::string dist = "marginal";
  double q_level = 0.75;
  std::size_t train_days = 0;
};

void run_plot(const PlotOpts& o) {
  auto panel = read_bids(o.in);
  apply_train_days(panel, o.train_days);
  if (o.what == "curve") {
    if (o.hour.empty()) throw Error("plot-data --what curve needs --hour");
    const auto it = panel.curves.find(parse_hour(o.hour));
    if (it == panel.curves.end())
      throw Error("hour " + o.hour + " not present in input");
    write_curve_polyline(o.out, it->second);
  } else {
    const auto dist = make_distribution(panel, parse_method(o.dist), o.q_level);
    write_ecdf(o.out, stepfit::detail::sorted_support(dist));
  }
  std::printf("wrote %s\n", o.out.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "stepfit: approximate monotone supply step curves with a small "
      "single-step basis (closed-form weighted-L2 projection, general L_r "
      "fitting, data-driven node selection, naive-baseline backtesting)"};
  app.footer(kFooter);
  app.require_subcommand(1);

  SynthOpts synth;
  auto* synth_cmd =
      app.add_subcommand("synth", "Generate deterministic synthetic bid data");
  synth_cmd->add_option("--seed", synth.seed, "PRNG seed")->capture_default_str();
  synth_cmd->add_option("--days", synth.days, "Calendar days")->capture_default_str();
  synth_cmd->add_option("--hours-per-day", synth.hours, "Hours per day")
      ->capture_default_str();
  synth_cmd->add_option("--bids-min", synth.bids_min, "Min bids per hour")
      ->capture_default_str();
  synth_cmd->add_option("--bids-max", synth.bids_max, "Max bids per hour")
      ->capture_default_str();
  synth_cmd->add_option("--perturb", synth.perturb,
                        "Day-to-day price jitter (price units); 0 = identical days")
      ->capture_default_str();
  synth_cmd->add_option("--bulk-max", synth.bulk_max, "Bulk price component upper end")
      ->capture_default_str();
  synth_cmd->add_option("--tail-max", synth.tail_max, "Tail price component upper end")
      ->capture_default_str();
  synth_cmd->add_option("--tail-weight", synth.tail_weight, "Tail component weight")
      ->capture_default_str();
  synth_cmd->add_option("--q-min", synth.q_min, "Min bid quantity")->capture_default_str();
  synth_cmd->add_option("--q-max", synth.q_max, "Max bid quantity")->capture_default_str();
  synth_cmd->add_option("--out", synth.out, "Output bid CSV")->required();
  synth_cmd->callback([&] { run_synth(synth); });

  BuildCurvesOpts build;
  auto* build_cmd = app.add_subcommand(
      "build-curves", "Aggregate a bid CSV into supply-curve knots");
  build_cmd->add_option("--in", build.in, "Bid CSV")->required();
  build_cmd->add_option("--out", build.out, "Curve CSV")->required();
  build_cmd->callback([&] { run_build_curves(build); });

  ApproximateOpts approx;
  auto* approx_cmd = app.add_subcommand(
      "approximate", "Fit every hourly curve on a fixed node set");
  approx_cmd->add_option("--in", approx.in, "Bid CSV")->required();
  auto* nl = approx_cmd->add_option("--nodes", approx.nodes_list,
                                    "Comma-separated node prices (0 is implied)");
  approx_cmd->add_option("--nodes-file", approx.nodes_file, "Node CSV")
      ->excludes(nl);
  approx_cmd->add_option("--out", approx.out, "Approximation CSV")->required();
  approx_cmd->add_flag("--verify", approx.verify,
                       "Check every fitted loss against the Riemann oracle");
  add_common(approx_cmd, approx.common);
  approx_cmd->callback([&] {
    if (approx.nodes_list.empty() && approx.nodes_file.empty())
      throw stepfit::Error("approximate needs --nodes or --nodes-file");
    run_approximate(approx);
  });

  SelectOpts select;
  auto* select_cmd = app.add_subcommand(
      "select-nodes", "Iterative node-count selection against the naive baseline");
  select_cmd->add_option("--in", select.in, "Bid CSV")->required();
  select_cmd->add_option("--train-days", select.train_days,
                         "Training window in days (0 = all data)")
      ->capture_default_str();
  select_cmd->add_option("--dist", select.dist, "Reference distribution")
      ->check(CLI::IsMember({"marginal", "conditional", "uniform"}))
      ->capture_default_str();
  select_cmd->add_option("--q-level", select.q_level,
                         "Quantity quantile for the conditional threshold")
      ->capture_default_str();
  select_cmd->add_option("--n-start", select.n_start, "Initial node count")
      ->capture_default_str();
  select_cmd->add_option("--n-cap", select.n_cap, "Node count cap")
      ->capture_default_str();
  select_cmd->add_option("--step", select.step, "Node count increment")
      ->capture_default_str();
  select_cmd->add_option("--sample", select.sample,
                         "Node sampling: deterministic quantiles or i.i.d. draws")
      ->check(CLI::IsMember({"quantile", "random"}))
      ->capture_default_str();
  select_cmd->add_option("--seed", select.seed, "Seed for --sample random")
      ->capture_default_str();
  select_cmd->add_option("--out", select.out, "Node CSV");
  select_cmd->add_option("--trace", select.trace, "Per-iteration trace CSV");
  add_common(select_cmd, select.common);
  select_cmd->callback([&] { run_select(select); });

  EvaluateOpts eval;
  auto* eval_cmd = app.add_subcommand(
      "evaluate", "Mean naive (previous-day) prediction error of the training window");
  eval_cmd->add_option("--in", eval.in, "Bid CSV")->required();
  eval_cmd->add_option("--train-days", eval.train_days,
                       "Training window in days (0 = all data)")
      ->capture_default_str();
  eval_cmd->add_option("--out", eval.out, "Output CSV (default: stdout)");
  add_common(eval_cmd, eval.common);
  eval_cmd->callback([&] { run_evaluate(eval); });

  ReportOpts report;
  auto* report_cmd = app.add_subcommand(
      "report", "Method x node-count comparison of mean scaled approximation errors");
  report_cmd->add_option("--in", report.in, "Bid CSV")->required();
  report_cmd->add_option("--train-days", report.train_days,
                         "Training window in days; the rest is the test window")
      ->required();
  report_cmd->add_option("--methods", report.methods, "Comma-separated methods")
      ->capture_default_str();
  report_cmd->add_option("--nodes", report.nodes, "Comma-separated node counts")
      ->capture_default_str();
  report_cmd->add_option("--q-level", report.q_level,
                         "Quantity quantile for the conditional threshold")
      ->capture_default_str();
  report_cmd->add_option("--out", report.out, "Report CSV")->required();
  add_common(report_cmd, report.common);
  report_cmd->callback([&] { run_report(report); });

  PlotOpts plot;
  auto* plot_cmd = app.add_subcommand(
      "plot-data", "Emit plot-ready CSV polylines and ECDFs");
  plot_cmd->add_option("--in", plot.in, "Bid CSV")->required();
  plot_cmd->add_option("--what", plot.what, "curve | ecdf")
      ->check(CLI::IsMember({"curve", "ecdf"}))
      ->capture_default_str();
  plot_cmd->add_option("--hour", plot.hour, "Hour stamp for --what curve");
  plot_cmd->add_option("--dist", plot.dist, "Distribution for --what ecdf")
      ->check(CLI::IsMember({"marginal", "conditional"}))
      ->capture_default_str();
  plot_cmd->add_option("--q-level", plot.q_level,
                       "Quantity quantile for the conditional threshold")
      ->capture_default_str();
  plot_cmd->add_option("--train-days", plot.train_days,
                       "Restrict ECDF to this training window (0 = all)")
      ->capture_default_str();
  plot_cmd->add_option("--out", plot.out, "Output CSV")->required();
  plot_cmd->callback([&] { run_plot(plot); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const stepfit::DegenerateIntervalError& e) {
    std::cerr << "stepfit: " << e.what() << '\n';
    return kExitDegenerate;
  } catch (const stepfit::NoNaivePairsError& e) {
    std::cerr << "stepfit: " << e.what() << '\n';
    return kExitNoNaivePairs;
  } catch (const stepfit::ParseError& e) {
    std::cerr << "stepfit: " << e.what() << '\n';
    return kExitParse;
  } catch (const stepfit::IoError& e) {
    std::cerr << "stepfit: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "stepfit: " << e.what() << '\n';
    return kExitDomain;
  }
  return 0;
}

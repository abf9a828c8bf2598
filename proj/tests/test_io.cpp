#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <string>

#include "test_support.hpp"

using namespace stepfit;
namespace fs = std::filesystem;

namespace {

/// Unique scratch path, removed on destruction.
struct TempFile {
  explicit TempFile(const std::string& name)
      : path(fs::temp_directory_path() /
             ("stepfit_test_" + std::to_string(::getpid()) + "_" + name)) {}
  ~TempFile() {
    std::error_code ec;
    fs::remove(path, ec);
  }
  fs::path path;
};

const std::string kGolden = STEPFIT_GOLDEN_DIR;

}  // namespace

TEST_CASE("read_bids parses and aggregates per hour") {
  TempFile f("bids.csv");
  testsupport::write_file(f.path.string(),
                          "timestamp,price,quantity\n"
                          "2016-01-01T09:00:00,10.00,5\n"
                          "2016-01-01T09:00:00,30,4.5\n");
  const auto panel = read_bids(f.path);
  REQUIRE_EQ(panel.curves.size(), 1);
  const auto& curve = panel.curves.begin()->second;
  REQUIRE_EQ(curve.steps(), 2);
  CHECK_EQ(curve.knots()[1].value, 9.5);
}

TEST_CASE("read_bids rejects malformed rows with the line number") {
  TempFile f("bad.csv");
  testsupport::write_file(f.path.string(),
                          "timestamp,price,quantity\n"
                          "2016-01-01T09:00:00,10.00,5\n"
                          "2016-01-01T09:00:00,11.00,-1\n");
  CHECK_THROWS_WITH_AS(read_bids(f.path), doctest::Contains("line 3"),
                       ParseError);

  testsupport::write_file(f.path.string(), "timestamp,price,quantity\n");
  CHECK_THROWS_AS(read_bids(f.path), ParseError);  // no rows

  testsupport::write_file(f.path.string(), "time,price,qty\nx,y,z\n");
  CHECK_THROWS_AS(read_bids(f.path), ParseError);  // wrong header

  CHECK_THROWS_AS(read_bids(f.path.string() + ".does-not-exist"), IoError);
}

TEST_CASE("48 hours of rows give 48 curves and 24 naive pairs") {
  TempFile f("twodays.csv");
  std::string text = "timestamp,price,quantity\n";
  const HourStamp start = HourStamp::from_civil(2016, 3, 1, 0);
  for (int h = 0; h < 48; ++h)
    text += format_hour(start + h) + ",10.00," + std::to_string(1 + h % 3) + "\n";
  testsupport::write_file(f.path.string(), text);
  const auto panel = read_bids(f.path);
  CHECK_EQ(panel.curves.size(), 48);
  const auto stats =
      mean_prediction_error(panel, UniformWeight{parse_price("40")}, 2.0);
  CHECK_EQ(stats.pairs, 24);
  CHECK_EQ(stats.skipped, 24);
}

TEST_CASE("synthetic generation is deterministic per seed") {
  SyntheticSpec spec;
  spec.seed = 7;
  spec.days = 2;
  spec.bids_per_hour_min = 3;
  spec.bids_per_hour_max = 6;
  const auto a = synthetic_bids(spec);
  const auto b = synthetic_bids(spec);
  REQUIRE_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK_EQ(a[i].hour, b[i].hour);
    CHECK_EQ(a[i].price, b[i].price);
    CHECK_EQ(a[i].quantity, b[i].quantity);
  }
  spec.seed = 8;
  const auto c = synthetic_bids(spec);
  bool any_diff = c.size() != a.size();
  for (std::size_t i = 0; !any_diff && i < a.size(); ++i)
    any_diff = a[i].price != c[i].price;
  CHECK(any_diff);

  // written twice -> byte-identical files
  TempFile f1("synth1.csv"), f2("synth2.csv");
  write_bids(f1.path, a);
  write_bids(f2.path, b);
  CHECK_EQ(testsupport::read_file(f1.path.string()),
           testsupport::read_file(f2.path.string()));

  // the parsed panel matches the in-memory one bit for bit
  const auto direct = generate_synthetic(spec);
  write_bids(f1.path, synthetic_bids(spec));
  const auto reread = read_bids(f1.path);
  REQUIRE_EQ(direct.curves.size(), reread.curves.size());
  auto it = reread.curves.begin();
  for (const auto& [hour, curve] : direct.curves) {
    CHECK(curve == it->second);
    ++it;
  }
}

TEST_CASE("synthetic edge cases") {
  SyntheticSpec spec;
  spec.days = 3;
  spec.bids_per_hour_min = spec.bids_per_hour_max = 1;
  SUBCASE("perturbation 0 makes all days identical") {
    spec.perturbation = 0.0;
    spec.bids_per_hour_min = spec.bids_per_hour_max = 5;
    const auto panel = generate_synthetic(spec);
    const auto stats =
        mean_prediction_error(panel, UniformWeight{parse_price("400")}, 2.0);
    CHECK_EQ(stats.mean, 0.0);
  }
  SUBCASE("one bid per hour gives one knot per curve") {
    const auto panel = generate_synthetic(spec);
    for (const auto& [hour, curve] : panel.curves) CHECK_EQ(curve.steps(), 1);
  }
  SUBCASE("spec validation") {
    spec.price_mixture = {{0.5, 0.0, 100.0}};  // weights do not sum to 1
    CHECK_THROWS_AS(synthetic_bids(spec), Error);
  }
}

TEST_CASE("node set round-trip") {
  TempFile f("nodes.csv");
  const NodeSet nodes({Price::zero(), parse_price("13"), parse_price("38.25")});
  write_nodes(f.path, nodes);
  CHECK_EQ(read_nodes(f.path).prices(), nodes.prices());

  testsupport::write_file(f.path.string(), "knot\n0\n");
  CHECK_THROWS_AS(read_nodes(f.path), ParseError);  // wrong header
}

TEST_CASE("approximation round-trip is lossless") {
  TempFile f("approx.csv");
  SplitMix64 rng(9);
  const auto curve = testsupport::random_curve(rng, 25);
  const auto ns = testsupport::random_node_set(rng, curve, 20);
  const auto w = testsupport::random_weight(rng, curve.max_price());
  const auto a = project_l2(curve, ns, w);
  write_approximation(f.path, a);
  const auto back = read_approximation(f.path);
  CHECK_EQ(back.nodes.prices(), a.nodes.prices());
  CHECK_EQ(back.phi, a.phi);      // %.17g round-trips doubles exactly
  CHECK_EQ(back.theta, a.theta);
  CHECK_EQ(back.loss, a.loss);
  CHECK_EQ(back.r, a.r);

  testsupport::write_file(f.path.string(), "node,phi,theta\n0,1,1\n");
  CHECK_THROWS_AS(read_approximation(f.path), ParseError);  // missing comments
}

TEST_CASE("report round-trip and fixed-point stability") {
  TempFile f1("report1.csv"), f2("report2.csv");
  ErrorReport report;
  report.naive_mscape = 5.9593e-3;
  report.scale = 3021.55;
  report.rows = {{Method::marginal, 5, 5.1193e-3},
                 {Method::conditional, 10, 6.529e-4},
                 {Method::uniform, 20, 6.54651e-2}};
  write_report(f1.path, report);
  const auto back = read_report(f1.path);
  REQUIRE_EQ(back.rows.size(), report.rows.size());
  CHECK_EQ(back.naive_mscape, doctest::Approx(report.naive_mscape).epsilon(1e-6));
  CHECK_EQ(back.scale, report.scale);
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    CHECK_EQ(back.rows[i].method, report.rows[i].method);
    CHECK_EQ(back.rows[i].nodes, report.rows[i].nodes);
    CHECK_EQ(back.rows[i].mscape,
             doctest::Approx(report.rows[i].mscape).epsilon(1e-6));
  }
  // write(read(write(x))) is byte-identical to write(x)
  write_report(f2.path, back);
  CHECK_EQ(testsupport::read_file(f1.path.string()),
           testsupport::read_file(f2.path.string()));
}

TEST_CASE("report golden fixture stays byte-stable") {
  ErrorReport report;
  report.naive_mscape = 5.9593e-3;
  report.scale = 1234.5;
  report.rows = {{Method::marginal, 5, 5.1193e-3},
                 {Method::marginal, 10, 8.497e-4},
                 {Method::uniform, 5, 1.576908e-1}};
  TempFile f("golden_report.csv");
  write_report(f.path, report);
  CHECK_EQ(testsupport::read_file(f.path.string()),
           testsupport::read_file(kGolden + "/report_format.csv"));
}

TEST_CASE("seeded selection run reproduces the frozen trace and node set") {
  SyntheticSpec spec;
  spec.seed = 7;
  spec.days = 4;
  spec.bids_per_hour_min = 10;
  spec.bids_per_hour_max = 20;
  const auto panel = generate_synthetic(spec);
  const WeightSpec w =
      parse_weight_option("uniform:auto").resolve(panel.max_training_price());
  const auto dist = make_distribution(panel, Method::marginal);
  const auto result = select_nodes(panel, w, 2.0, dist, 1, 64);
  CHECK_EQ(result.trace.status, SelectionStatus::converged);
  const auto& last = result.trace.records.back();
  CHECK_LT(last.mean_approx_error, last.mean_prediction_error);

  TempFile trace("trace.csv"), nodes("nodes.csv");
  write_trace(trace.path, result.trace);
  write_nodes(nodes.path, result.nodes);
  CHECK_EQ(testsupport::read_file(trace.path.string()),
           testsupport::read_file(kGolden + "/trace_seed7.csv"));
  CHECK_EQ(testsupport::read_file(nodes.path.string()),
           testsupport::read_file(kGolden + "/nodes_seed7.csv"));
}

TEST_CASE("seeded pipeline reproduces the frozen comparison report") {
  SyntheticSpec spec;
  spec.seed = 7;
  spec.days = 40;
  TempFile bids("bids.csv"), out("report.csv");
  write_bids(bids.path, synthetic_bids(spec));
  auto panel = read_bids(bids.path);
  panel.train_end = panel.curves.begin()->first + 30 * 24;
  const auto scaled = scale_panel(panel);
  const WeightSpec w = parse_weight_option("uniform:auto")
                           .resolve(scaled.panel.max_training_price());
  const auto report = comparison_report(
      scaled, {Method::marginal, Method::conditional, Method::uniform},
      {5, 10, 15, 20}, w, 2.0, 0.75, 0);
  REQUIRE_EQ(report.rows.size(), 12);
  write_report(out.path, report);
  CHECK_EQ(testsupport::read_file(out.path.string()),
           testsupport::read_file(kGolden + "/report_seed7.csv"));
}

TEST_CASE("plot data: polyline doubles jump points, ECDF is a staircase") {
  TempFile f("plot.csv");
  const auto curve = StepCurve::from_knots(
      {{parse_price("10"), 5.0}, {parse_price("30"), 12.0}});
  write_curve_polyline(f.path, curve);
  CHECK_EQ(testsupport::read_file(f.path.string()),
           "price,value\n0,0\n10,0\n10,5\n30,5\n30,12\n");

  write_ecdf(f.path, {parse_price("5"), parse_price("5"), parse_price("9")});
  CHECK_EQ(testsupport::read_file(f.path.string()),
           "price,cdf\n5,0\n5,0.66666666666666663\n9,0.66666666666666663\n9,1\n");
}

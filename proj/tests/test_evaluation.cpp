#include <doctest.h>

#include <cmath>

#include "test_support.hpp"

using namespace stepfit;

namespace {

const HourStamp kStart = HourStamp::from_civil(2016, 1, 1, 0);
const WeightSpec kUniform40 = UniformWeight{parse_price("40")};

CurvePanel two_day_panel(double day2_value) {
  CurvePanel panel;
  for (int h = 0; h < 48; ++h) {
    const double v = h < 24 ? 8.0 : day2_value;
    panel.curves.emplace(kStart + h,
                         StepCurve::from_knots({{parse_price("10"), v}}));
  }
  panel.train_end = kStart + 48;
  return panel;
}

}  // namespace

TEST_CASE("naive_prediction_error: identical days and the hand fixture") {
  const auto same = two_day_panel(8.0);
  CHECK_EQ(*naive_prediction_error(same, kStart + 24, kUniform40, 2.0), 0.0);

  // C_t = 5 on [10, inf), C_{t-24} = 8: |3|^2 over [10, 40] -> 9 * 30 = 270
  const auto diff = two_day_panel(5.0);
  CHECK_EQ(*naive_prediction_error(diff, kStart + 30, kUniform40, 2.0),
           doctest::Approx(270.0));

  CHECK_FALSE(naive_prediction_error(diff, kStart + 5, kUniform40, 2.0)
                  .has_value());  // no previous day

  // curves differing only where the weight has died
  const WeightSpec decaying = ExponentialWeight{0.5};
  CurvePanel tail;
  tail.curves.emplace(kStart, StepCurve::from_knots({{parse_price("300"), 2.0}}));
  tail.curves.emplace(kStart + 24,
                      StepCurve::from_knots({{parse_price("300"), 9.0}}));
  tail.train_end = kStart + 48;
  CHECK_LE(*naive_prediction_error(tail, kStart + 24, decaying, 2.0), 1e-9);
}

TEST_CASE("mean_prediction_error over the training window") {
  const auto same = two_day_panel(8.0);
  const auto stats = mean_prediction_error(same, kUniform40, 2.0);
  CHECK_EQ(stats.mean, 0.0);
  CHECK_EQ(stats.pairs, 24);
  CHECK_EQ(stats.skipped, 24);  // first day has no previous day

  const auto diff = two_day_panel(5.0);
  CHECK_EQ(mean_prediction_error(diff, kUniform40, 2.0).mean,
           doctest::Approx(270.0));

  // single valid pair
  CurvePanel tiny;
  tiny.curves.emplace(kStart, StepCurve::from_knots({{parse_price("10"), 1.0}}));
  tiny.curves.emplace(kStart + 24,
                      StepCurve::from_knots({{parse_price("10"), 3.0}}));
  tiny.train_end = kStart + 48;
  const auto single = mean_prediction_error(tiny, kUniform40, 2.0);
  CHECK_EQ(single.pairs, 1);
  CHECK_EQ(single.mean, doctest::Approx(4.0 * 30.0));

  // no pairs at all
  CurvePanel lonely;
  lonely.curves.emplace(kStart, StepCurve::from_knots({{parse_price("10"), 1.0}}));
  lonely.train_end = kStart + 48;
  CHECK_THROWS_AS(mean_prediction_error(lonely, kUniform40, 2.0),
                  NoNaivePairsError);
}

TEST_CASE("mean_approx_error") {
  const auto curve = StepCurve::from_knots(
      {{parse_price("10"), 5.0}, {parse_price("30"), 12.0}});
  const NodeSet span({Price::zero(), parse_price("10"), parse_price("30")});
  const std::vector<const StepCurve*> one{&curve};
  CHECK_LE(mean_approx_error(one, span, kUniform40, 2.0), 1e-12);

  const NodeSet coarse({Price::zero(), parse_price("20")});
  CHECK_EQ(mean_approx_error(one, coarse, kUniform40, 2.0),
           doctest::Approx(370.0));

  // mean over several curves equals the average of individual losses,
  // independent of thread count
  SplitMix64 rng(5);
  std::vector<StepCurve> curves;
  for (int i = 0; i < 9; ++i)
    curves.push_back(testsupport::random_curve(rng, 20, 3000));
  std::vector<const StepCurve*> ptrs;
  for (const auto& c : curves) ptrs.push_back(&c);
  const NodeSet ns({Price::zero(), parse_price("10"), parse_price("25")});
  const WeightSpec w = ExponentialWeight{0.02};
  NeumaierSum expect;
  for (const auto* c : ptrs) expect.add(project_l2(*c, ns, w).loss);
  const double serial = mean_approx_error(ptrs, ns, w, 2.0, 1);
  const double parallel = mean_approx_error(ptrs, ns, w, 2.0, 4);
  CHECK_EQ(serial, expect.value() / 9.0);
  CHECK_EQ(serial, parallel);  // bit-identical by construction

  CHECK_THROWS_AS(
      mean_approx_error(std::vector<const StepCurve*>{}, ns, w, 2.0), Error);
}

TEST_CASE("scale_panel divides quantities by the training maximum") {
  auto panel = two_day_panel(5.0);
  panel.train_end = kStart + 24;  // first day trains, max value 8
  const auto scaled = scale_panel(panel);
  CHECK_EQ(scaled.scale, 8.0);
  CHECK_EQ(scaled.panel.curves.at(kStart).total(), 1.0);
  CHECK_EQ(scaled.panel.curves.at(kStart + 24).total(), doctest::Approx(5.0 / 8.0));
  // prices untouched
  CHECK_EQ(scaled.panel.curves.at(kStart).knots()[0].price, parse_price("10"));

  SUBCASE("loss homogeneity: r=2 scales by 1/scale^2, r=1 by 1/scale") {
    const auto& a = panel.curves.at(kStart + 30);
    const auto& b = panel.curves.at(kStart + 6);
    const auto& sa = scaled.panel.curves.at(kStart + 30);
    const auto& sb = scaled.panel.curves.at(kStart + 6);
    const double l2 = curve_distance(a, b, kUniform40, 2.0);
    const double l2s = curve_distance(sa, sb, kUniform40, 2.0);
    CHECK_EQ(l2s * scaled.scale * scaled.scale,
             doctest::Approx(l2).epsilon(1e-12));
    const double l1 = curve_distance(a, b, kUniform40, 1.0);
    const double l1s = curve_distance(sa, sb, kUniform40, 1.0);
    CHECK_EQ(l1s * scaled.scale, doctest::Approx(l1).epsilon(1e-12));
  }
}

TEST_CASE("comparison_report: shape, Q=0 coincidence, naive baseline") {
  // 3 training days + 1 test day of seeded random curves
  SplitMix64 rng(2718);
  CurvePanel panel;
  for (int h = 0; h < 96; ++h)
    panel.curves.emplace(kStart + h, testsupport::random_curve(rng, 25, 10000));
  panel.train_end = kStart + 72;
  const auto scaled = scale_panel(panel);
  const WeightSpec w =
      parse_weight_option("uniform:auto").resolve(scaled.panel.max_training_price());

  SUBCASE("single method, single n -> one row") {
    const auto report =
        comparison_report(scaled, {Method::marginal}, {5}, w, 2.0);
    REQUIRE_EQ(report.rows.size(), 1);
    CHECK_EQ(report.rows[0].method, Method::marginal);
    CHECK_EQ(report.rows[0].nodes, 5);
    CHECK_GE(report.rows[0].mscape, 0.0);
    CHECK_GT(report.naive_mscape, 0.0);
    CHECK_GT(report.scale, 0.0);
  }

  SUBCASE("q_level = 0 makes conditional rows equal marginal rows") {
    const auto report = comparison_report(
        scaled, {Method::marginal, Method::conditional}, {4, 7}, w, 2.0,
        /*q_level=*/0.0);
    REQUIRE_EQ(report.rows.size(), 4);
    CHECK_EQ(report.rows[0].mscape, report.rows[2].mscape);
    CHECK_EQ(report.rows[1].mscape, report.rows[3].mscape);
  }

  SUBCASE("all errors non-negative across methods") {
    const auto report = comparison_report(
        scaled, {Method::marginal, Method::conditional, Method::uniform},
        {5, 10}, w, 2.0);
    for (const auto& row : report.rows) CHECK_GE(row.mscape, 0.0);
  }
}

TEST_CASE("uniform-grid report errors shrink along nested refinements") {
  SplitMix64 rng(321);
  CurvePanel panel;
  for (int h = 0; h < 96; ++h)
    panel.curves.emplace(kStart + h, testsupport::random_curve(rng, 30, 20000));
  panel.train_end = kStart + 72;
  const auto scaled = scale_panel(panel);
  const WeightSpec w =
      parse_weight_option("uniform:auto").resolve(scaled.panel.max_training_price());
  // {5, 9, 17}: each grid contains the previous one's nodes
  const auto report =
      comparison_report(scaled, {Method::uniform}, {5, 9, 17}, w, 2.0);
  REQUIRE_EQ(report.rows.size(), 3);
  CHECK_LE(report.rows[1].mscape, report.rows[0].mscape + 1e-12);
  CHECK_LE(report.rows[2].mscape, report.rows[1].mscape + 1e-12);
}

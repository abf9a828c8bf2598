#include <doctest.h>

#include <cmath>

#include "test_support.hpp"

using namespace stepfit;

TEST_CASE("tail_mass closed forms") {
  const WeightSpec exp_w = ExponentialWeight{0.01};
  CHECK_EQ(tail_mass(exp_w, Price::zero()), doctest::Approx(100.0));
  const WeightSpec uni = UniformWeight{parse_price("40")};
  CHECK_EQ(tail_mass(uni, parse_price("20")), 20.0);
  CHECK_EQ(tail_mass(uni, parse_price("50")), 0.0);
  CHECK_EQ(tail_mass(uni, Price::infinity()), 0.0);
}

TEST_CASE("interval_mass closed forms and edge cases") {
  const WeightSpec exp_w = ExponentialWeight{0.01};
  CHECK_EQ(interval_mass(exp_w, Price::zero(), Price::infinity()),
           doctest::Approx(100.0));
  const WeightSpec uni = UniformWeight{parse_price("40")};
  CHECK_EQ(interval_mass(uni, parse_price("10"), parse_price("30")), 20.0);
  CHECK_EQ(interval_mass(uni, parse_price("10"), parse_price("10")), 0.0);
  CHECK_EQ(interval_mass(exp_w, parse_price("5"), parse_price("5")), 0.0);
  CHECK_EQ(interval_mass(uni, parse_price("50"), Price::infinity()), 0.0);
  CHECK_THROWS_WITH_AS(interval_mass(uni, parse_price("30"), parse_price("10")),
                       doctest::Contains("inverted interval"), Error);
}

TEST_CASE("tail_mass is non-increasing and interval_mass additive") {
  SplitMix64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const WeightSpec w = testsupport::random_weight(rng, parse_price("400"));
    auto t1 = static_cast<std::int64_t>(rng.next_below(60000));
    auto t2 = static_cast<std::int64_t>(rng.next_below(60000));
    auto t3 = static_cast<std::int64_t>(rng.next_below(60000));
    if (t1 > t2) std::swap(t1, t2);
    if (t2 > t3) std::swap(t2, t3);
    if (t1 > t2) std::swap(t1, t2);
    const Price a = Price::from_ticks(t1);
    const Price b = Price::from_ticks(t2);
    const Price c = Price::from_ticks(t3);
    CHECK_GE(tail_mass(w, a), tail_mass(w, b));
    const double whole = interval_mass(w, a, c);
    const double parts = interval_mass(w, a, b) + interval_mass(w, b, c);
    CHECK_EQ(whole, doctest::Approx(parts).epsilon(1e-12));
  }
}

TEST_CASE("tail_mass agrees with brute-force quadrature of the density") {
  SplitMix64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const WeightSpec w = testsupport::random_weight(rng, parse_price("300"));
    const double cut = effective_support_end(w).units();
    const Price p = Price::from_ticks(rng.next_below(20000));
    if (p.units() >= cut) continue;
    const double step = 1e-3;
    const auto cells = static_cast<std::int64_t>(std::ceil((cut - p.units()) / step));
    NeumaierSum sum;
    for (std::int64_t k = 0; k < cells; ++k)
      sum.add(density(w, p.units() + (static_cast<double>(k) + 0.5) * step) * step);
    const double expected = tail_mass(w, p);
    if (expected > 0.0)
      CHECK_EQ(sum.value(), doctest::Approx(expected).epsilon(1e-6));
  }
}

TEST_CASE("weight option parsing") {
  const auto exp_opt = parse_weight_option("exp:0.01");
  REQUIRE(exp_opt.fixed.has_value());
  CHECK_EQ(std::get<ExponentialWeight>(*exp_opt.fixed).rate, 0.01);

  const auto uni_opt = parse_weight_option("uniform:40");
  REQUIRE(uni_opt.fixed.has_value());
  CHECK_EQ(std::get<UniformWeight>(*uni_opt.fixed).p_max, parse_price("40"));

  const auto auto_opt = parse_weight_option("uniform:auto");
  CHECK_FALSE(auto_opt.fixed.has_value());
  CHECK_EQ(std::get<UniformWeight>(auto_opt.resolve(parse_price("123.45"))).p_max,
           parse_price("123.45"));
  CHECK_THROWS_AS(auto_opt.resolve(Price::zero()), Error);

  CHECK_THROWS_AS(parse_weight_option("triangular:3"), ParseError);
  CHECK_THROWS_AS(parse_weight_option("exp:-1"), Error);
  CHECK_THROWS_AS(parse_weight_option("exp:zzz"), ParseError);
  CHECK_THROWS_AS(parse_weight_option("uniform:0"), Error);
  CHECK_THROWS_AS(parse_weight_option(""), ParseError);
}

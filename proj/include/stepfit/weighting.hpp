#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include <stepfit/errors.hpp>
#include <stepfit/price.hpp>

namespace stepfit {

/// W(p) = exp(-rate * p), rate > 0. Strictly positive tail.
struct ExponentialWeight {
  double rate;
};

/// W(p) = 1 on [0, p_max], 0 beyond. Matches bounded-grid comparisons and
/// weighs every observed price equally.
struct UniformWeight {
  Price p_max;
};

/*!
  A weight function exposed through closed forms of its tail integral
  Omega(p) = int_p^inf W(u) du. Everything the projection needs from W is an
  exact interval mass, so only the two analytic variants are supported;
  numeric weight tables would forfeit that exactness.
*/
using WeightSpec = std::variant<ExponentialWeight, UniformWeight>;

inline void validate(const WeightSpec& w) {
  if (const auto* e = std::get_if<ExponentialWeight>(&w)) {
    if (!(e->rate > 0.0)) throw Error("exponential weight rate must be positive");
  } else {
    const auto& u = std::get<UniformWeight>(w);
    if (u.p_max.is_infinite() || u.p_max <= Price::zero())
      throw Error("uniform weight p_max must be finite and positive");
  }
}

/// Omega(p), exactly: Exponential -> exp(-rate*p)/rate, Uniform -> max(0, p_max-p).
inline double tail_mass(const WeightSpec& w, Price p) {
  if (p.is_infinite()) return 0.0;
  if (const auto* e = std::get_if<ExponentialWeight>(&w))
    return std::exp(-e->rate * p.units()) / e->rate;
  const auto& u = std::get<UniformWeight>(w);
  const std::int64_t left = std::max<std::int64_t>(u.p_max.ticks() - p.ticks(), 0);
  return static_cast<double>(left) / static_cast<double>(kTicksPerUnit);
}

/*!
  Omega(a) - Omega(b) for 0 <= a <= b, with b == Price::infinity() giving
  Omega(a). Evaluated per variant without subtracting near-equal tails:
  short intervals keep full relative accuracy, which the per-interval
  projection ratios rely on.
*/
inline double interval_mass(const WeightSpec& w, Price a, Price b) {
  if (b < a) throw Error("inverted interval: a > b");
  if (a == b) return 0.0;
  if (const auto* e = std::get_if<ExponentialWeight>(&w)) {
    if (b.is_infinite()) return std::exp(-e->rate * a.units()) / e->rate;
    const double width = static_cast<double>(b.ticks() - a.ticks()) /
                         static_cast<double>(kTicksPerUnit);
    return std::exp(-e->rate * a.units()) * (-std::expm1(-e->rate * width)) /
           e->rate;
  }
  const auto& u = std::get<UniformWeight>(w);
  const std::int64_t hi =
      b.is_infinite() ? u.p_max.ticks() : std::min(b.ticks(), u.p_max.ticks());
  const std::int64_t lo = std::min(a.ticks(), u.p_max.ticks());
  return static_cast<double>(std::max<std::int64_t>(hi - lo, 0)) /
         static_cast<double>(kTicksPerUnit);
}

/// Pointwise W(p). Only the Riemann oracle needs the density itself.
inline double density(const WeightSpec& w, double p_units) {
  if (const auto* e = std::get_if<ExponentialWeight>(&w))
    return std::exp(-e->rate * p_units);
  return p_units <= std::get<UniformWeight>(w).p_max.units() ? 1.0 : 0.0;
}

/// Price beyond which the remaining tail mass is below `fraction` of the
/// total; used to truncate brute-force scans.
inline Price effective_support_end(const WeightSpec& w, double fraction = 1e-9) {
  if (const auto* e = std::get_if<ExponentialWeight>(&w))
    return Price::from_units(std::log(1.0 / fraction) / e->rate + 1.0);
  return std::get<UniformWeight>(w).p_max;
}

/*!
  CLI/config encoding of a weight: "exp:<rate>", "uniform:<p_max>", or
  "uniform:auto" where p_max is resolved against the maximum observed
  training price.
*/
struct WeightOption {
  std::optional<WeightSpec> fixed;  // nullopt => uniform with data-driven p_max

  WeightSpec resolve(Price max_observed_price) const {
    if (fixed) return *fixed;
    if (max_observed_price <= Price::zero())
      throw Error("cannot resolve uniform:auto weight: no positive price observed");
    return UniformWeight{max_observed_price};
  }
};

inline WeightOption parse_weight_option(std::string_view text) {
  const auto colon = text.find(':');
  if (colon != std::string_view::npos) {
    const auto kind = text.substr(0, colon);
    const auto arg = text.substr(colon + 1);
    if (kind == "exp") {
      double rate = 0.0;
      const char* end = arg.data() + arg.size();
      const auto res = std::from_chars(arg.data(), end, rate);
      if (res.ec != std::errc{} || res.ptr != end || !std::isfinite(rate))
        throw ParseError("invalid exponential rate: '" + std::string(arg) + "'");
      WeightSpec w = ExponentialWeight{rate};
      validate(w);
      return WeightOption{w};
    }
    if (kind == "uniform") {
      if (arg == "auto") return WeightOption{std::nullopt};
      WeightSpec w = UniformWeight{parse_price(arg)};
      validate(w);
      return WeightOption{w};
    }
  }
  throw ParseError("invalid weight spec: '" + std::string(text) +
                   "' (expected exp:<rate> | uniform:<p_max> | uniform:auto)");
}

}  // namespace stepfit

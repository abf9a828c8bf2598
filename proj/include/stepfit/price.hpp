#pragma once

#include <cctype>
#include <cmath>
#include <compare>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>

#include <stepfit/errors.hpp>

namespace stepfit {

/// Decimal places kept for prices. Market prices are quoted in cents, so two
/// places make equal quotes compare exactly equal; change here to rebuild the
/// library at another precision.
inline constexpr int kPriceDecimals = 2;

namespace detail {
constexpr std::int64_t pow10(int n) {
  std::int64_t v = 1;
  for (int i = 0; i < n; ++i) v *= 10;
  return v;
}
}  // namespace detail

inline constexpr std::int64_t kTicksPerUnit = detail::pow10(kPriceDecimals);

/*!
  A price as an exact decimal: an integer count of ticks (1 tick = 10^-2
  currency units by default). Integer keys make deduplication and breakpoint
  merging exact, where floating-point keys would drift.

  `Price::infinity()` is a dedicated sentinel for the open upper end of the
  last basis interval; arithmetic helpers treat it specially.
*/
class Price {
 public:
  constexpr Price() = default;

  static constexpr Price from_ticks(std::int64_t ticks) { return Price(ticks); }

  /// Nearest-tick rounding; use only for computed prices (grids), never for
  /// parsed market data.
  static Price from_units(double units) {
    if (!std::isfinite(units) ||
        std::abs(units) > 9.0e15 / static_cast<double>(kTicksPerUnit))
      throw Error("price out of tick range");
    return Price(static_cast<std::int64_t>(
        units * static_cast<double>(kTicksPerUnit) +
        (units >= 0 ? 0.5 : -0.5)));
  }

  static constexpr Price zero() { return Price(0); }

  static constexpr Price infinity() {
    return Price(std::numeric_limits<std::int64_t>::max());
  }

  constexpr std::int64_t ticks() const { return ticks_; }

  constexpr bool is_infinite() const { return *this == infinity(); }

  /// Value in currency units; +inf for the sentinel.
  double units() const {
    if (is_infinite()) return std::numeric_limits<double>::infinity();
    return static_cast<double>(ticks_) / static_cast<double>(kTicksPerUnit);
  }

  friend constexpr auto operator<=>(Price, Price) = default;

 private:
  explicit constexpr Price(std::int64_t ticks) : ticks_(ticks) {}

  std::int64_t ticks_ = 0;
};

/*!
  Parses a non-negative decimal price with at most kPriceDecimals fractional
  digits. Rejects anything else: negative values, excess precision, exponents,
  junk. Exactness of the tick representation is the point, so no rounding.
*/
inline Price parse_price(std::string_view text, std::size_t line = 0) {
  if (text.empty()) throw ParseError("empty price", line);
  std::size_t pos = 0;
  std::int64_t units = 0;
  bool any_digit = false;
  while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
    units = units * 10 + (text[pos] - '0');
    if (units > std::numeric_limits<std::int64_t>::max() / kTicksPerUnit / 10)
      throw ParseError("price out of range: '" + std::string(text) + "'", line);
    ++pos;
    any_digit = true;
  }
  std::int64_t frac = 0;
  if (pos < text.size() && text[pos] == '.') {
    ++pos;
    int digits = 0;
    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
      if (++digits > kPriceDecimals)
        throw ParseError("price '" + std::string(text) + "' has more than " +
                             std::to_string(kPriceDecimals) + " decimals",
                         line);
      frac = frac * 10 + (text[pos] - '0');
      ++pos;
      any_digit = true;
    }
    for (int i = digits; i < kPriceDecimals; ++i) frac *= 10;
  }
  if (!any_digit || pos != text.size())
    throw ParseError("invalid price: '" + std::string(text) + "'", line);
  return Price::from_ticks(units * kTicksPerUnit + frac);
}

/// Minimal decimal form: "13", "12.3", "12.34". Parses back to the same tick.
inline std::string format_price(Price p) {
  if (p.is_infinite()) return "inf";
  std::int64_t t = p.ticks();
  std::string sign;
  if (t < 0) {
    sign = "-";
    t = -t;
  }
  std::string s = sign + std::to_string(t / kTicksPerUnit);
  std::int64_t frac = t % kTicksPerUnit;
  if (frac != 0) {
    std::string f = std::to_string(frac);
    f.insert(f.begin(), static_cast<std::size_t>(kPriceDecimals) - f.size(), '0');
    while (!f.empty() && f.back() == '0') f.pop_back();
    s += "." + f;
  }
  return s;
}

}  // namespace stepfit

#pragma once

#include <cctype>
#include <compare>
#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>

#include <stepfit/errors.hpp>

namespace stepfit {

namespace detail {

// Civil-calendar conversions (proleptic Gregorian), days since 1970-01-01.
constexpr std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

struct Civil {
  std::int64_t year;
  unsigned month;
  unsigned day;
};

constexpr Civil civil_from_days(std::int64_t z) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp + (mp < 10 ? 3 : -9);
  return {y + (m <= 2), m, d};
}

}  // namespace detail

/*!
  A calendar timestamp at exact hourly resolution, stored as hours since
  1970-01-01T00 (no time zone). The type cannot represent sub-hour instants,
  which is the bid-record invariant.
*/
class HourStamp {
 public:
  constexpr HourStamp() = default;

  static constexpr HourStamp from_index(std::int64_t hours) {
    return HourStamp(hours);
  }

  static constexpr HourStamp from_civil(std::int64_t year, unsigned month,
                                        unsigned day, unsigned hour) {
    return HourStamp(detail::days_from_civil(year, month, day) * 24 + hour);
  }

  constexpr std::int64_t index() const { return hours_; }

  constexpr HourStamp operator+(std::int64_t hours) const {
    return HourStamp(hours_ + hours);
  }
  constexpr HourStamp operator-(std::int64_t hours) const {
    return HourStamp(hours_ - hours);
  }
  constexpr std::int64_t operator-(HourStamp other) const {
    return hours_ - other.hours_;
  }

  friend constexpr auto operator<=>(HourStamp, HourStamp) = default;

 private:
  explicit constexpr HourStamp(std::int64_t hours) : hours_(hours) {}

  std::int64_t hours_ = 0;
};

/*!
  Parses "YYYY-MM-DDTHH:00:00" (seconds may be omitted). Minutes and seconds
  must be zero: a bid timestamp truncates exactly to an hour boundary, and
  anything else is rejected rather than silently floored.
*/
inline HourStamp parse_hour(std::string_view text, std::size_t line = 0) {
  auto fail = [&]() -> HourStamp {
    throw ParseError("invalid hour timestamp: '" + std::string(text) + "'", line);
  };
  auto digits = [&](std::size_t pos, std::size_t count) -> std::int64_t {
    std::int64_t v = 0;
    for (std::size_t i = 0; i < count; ++i) {
      if (pos + i >= text.size() ||
          !std::isdigit(static_cast<unsigned char>(text[pos + i])))
        fail();
      v = v * 10 + (text[pos + i] - '0');
    }
    return v;
  };
  if (text.size() != 16 && text.size() != 19) fail();
  const std::int64_t year = digits(0, 4);
  if (text[4] != '-') fail();
  const std::int64_t month = digits(5, 2);
  if (text[7] != '-') fail();
  const std::int64_t day = digits(8, 2);
  if (text[10] != 'T') fail();
  const std::int64_t hour = digits(11, 2);
  if (text[13] != ':') fail();
  const std::int64_t minute = digits(14, 2);
  std::int64_t second = 0;
  if (text.size() == 19) {
    if (text[16] != ':') fail();
    second = digits(17, 2);
  }
  if (month < 1 || month > 12 || day < 1 || day > 31 || hour > 23) fail();
  const auto roundtrip = detail::civil_from_days(
      detail::days_from_civil(year, static_cast<unsigned>(month),
                              static_cast<unsigned>(day)));
  if (roundtrip.year != year || roundtrip.month != month || roundtrip.day != day)
    fail();  // e.g. Feb 30
  if (minute != 0 || second != 0)
    throw ParseError("timestamp '" + std::string(text) +
                         "' is not on an hour boundary",
                     line);
  return HourStamp::from_civil(year, static_cast<unsigned>(month),
                               static_cast<unsigned>(day),
                               static_cast<unsigned>(hour));
}

inline std::string format_hour(HourStamp t) {
  std::int64_t days = t.index() / 24;
  std::int64_t hour = t.index() % 24;
  if (hour < 0) {
    hour += 24;
    --days;
  }
  const auto c = detail::civil_from_days(days);
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%04lld-%02u-%02uT%02lld:00:00",
                static_cast<long long>(c.year), c.month, c.day,
                static_cast<long long>(hour));
  return buf;
}

}  // namespace stepfit

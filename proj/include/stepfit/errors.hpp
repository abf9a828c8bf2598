#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace stepfit {

/// Base class for all errors thrown by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Malformed input text (CSV rows, price strings, timestamps).
struct ParseError : Error {
  explicit ParseError(const std::string& what, std::size_t line = 0)
      : Error(line ? what + " (line " + std::to_string(line) + ")" : what),
        line(line) {}

  std::size_t line;
};

/// File could not be opened, read or written.
struct IoError : Error {
  using Error::Error;
};

/// A node interval carries no weight mass; the fit there is ill posed.
struct DegenerateIntervalError : Error {
  explicit DegenerateIntervalError(std::size_t interval_index,
                                   const std::string& context = {})
      : Error("degenerate interval " + std::to_string(interval_index) +
              ": no weight mass between consecutive nodes" + context),
        interval(interval_index) {}

  /// 1-based index of the offending inter-node interval.
  std::size_t interval;
};

/// The panel has no hour with a same-hour previous-day partner.
struct NoNaivePairsError : Error {
  NoNaivePairsError() : Error("no valid (t, t-24h) pairs in the window") {}
};

}  // namespace stepfit

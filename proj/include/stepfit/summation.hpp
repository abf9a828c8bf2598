#pragma once

#include <cmath>

namespace stepfit {

/// Neumaier compensated accumulator. Batch means and piecewise integrals sum
/// many terms of mixed magnitude; compensation keeps the result independent of
/// chunking to well below the documented tolerances.
class NeumaierSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }

  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace stepfit

#pragma once

#include <cmath>

namespace tw {

/// Neumaier-compensated accumulator. All measure integrals are finite sums
/// taken in a fixed ascending order through one of these, which makes results
/// reproducible bit-for-bit regardless of how callers schedule work.
class CompensatedSum {
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

}  // namespace tw

#pragma once

#include <cmath>

namespace entwb {

// Library-wide tolerance for mass conservation; fixed so results are
// reproducible across runs (the CLI can override its own copy).
inline constexpr double kMassTol = 1e-9;

// Neumaier variant of compensated summation. Deterministic for a fixed
// addition order, which makes entropies independent of cell layout noise.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// -p log p with the 0 log 0 = 0 convention taken by an explicit branch,
// not by a floating-point limit.
inline double neg_p_log_p(double p) { return p > 0.0 ? -p * std::log(p) : 0.0; }

}  // namespace entwb

#pragma once

namespace gcmc {

/// Compensated (Kahan) accumulator. Tracks the rounding error of each
/// addition and feeds it back into the next one, so long pair-energy sums
/// stay accurate independent of term count.
struct KahanSum {
  double sum = 0.0;
  double compensation = 0.0;

  void add(double value) {
    const double y = value - compensation;
    const double t = sum + y;
    compensation = (t - sum) - y;
    sum = t;
  }

  double value() const { return sum; }
};

}  // namespace gcmc

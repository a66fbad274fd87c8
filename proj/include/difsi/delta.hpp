#pragma once

#include <cmath>

namespace difsi {

/// Three-point regularized delta of Roma, Peskin & Berger for staggered grids.
/// Support radius 1.5 cells; sums to one and has zero first moment over any
/// integer-shifted sampling.
struct DeltaKernel {
  static constexpr double support = 1.5;

  static double weight(double r) {
    const double a = std::abs(r);
    if (a <= 0.5) return (1.0 + std::sqrt(1.0 - 3.0 * a * a)) / 3.0;
    if (a < 1.5) {
      const double q = 1.0 - a;
      return (5.0 - 3.0 * a - std::sqrt(1.0 - 3.0 * q * q)) / 6.0;
    }
    return 0.0;
  }

  /// d weight / d r.
  static double derivative(double r) {
    const double a = std::abs(r);
    const double sign = r < 0.0 ? -1.0 : 1.0;
    if (a <= 0.5) return -r / std::sqrt(1.0 - 3.0 * a * a);
    if (a < 1.5) {
      const double q = 1.0 - a;
      return sign * (-3.0 - 3.0 * q / std::sqrt(1.0 - 3.0 * q * q)) / 6.0;
    }
    return 0.0;
  }
};

}  // namespace difsi

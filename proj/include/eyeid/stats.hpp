#pragma once

#include <array>
#include <span>

namespace eyeid {

/// Population moments. Skewness is m3 / m2^1.5 and kurtosis is the excess
/// m4 / m2^2 - 3; both are 0 when the series has (numerically) zero variance.
struct Moments {
  double mean = 0.0;
  double variance = 0.0;
  double skewness = 0.0;
  double kurtosis = 0.0;
};

Moments moments(std::span<const double> xs);

double median(std::span<const double> xs);

/// Mean, median, max, std, skewness, kurtosis.
using M3S2K = std::array<double, 6>;

/// An empty series yields all zeros.
M3S2K m3s2k(std::span<const double> xs);

}  // namespace eyeid

#include "eyeid/stats.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace eyeid {

Moments moments(std::span<const double> xs) {
  Moments m;
  if (xs.empty()) return m;
  const double n = static_cast<double>(xs.size());
  double sum = 0.0;
  double scale = 0.0;
  for (double x : xs) {
    sum += x;
    scale = std::max(scale, std::abs(x));
  }
  m.mean = sum / n;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double x : xs) {
    const double d = x - m.mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  m.variance = m2;
  const double tiny = 1e-12 * scale;
  if (m2 <= tiny * tiny) {
    m.variance = 0.0;
    return m;
  }
  m.skewness = m3 / std::pow(m2, 1.5);
  m.kurtosis = m4 / (m2 * m2) - 3.0;
  return m;
}

double median(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  std::vector<double> v(xs.begin(), xs.end());
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

M3S2K m3s2k(std::span<const double> xs) {
  if (xs.empty()) return {};
  const Moments m = moments(xs);
  return {m.mean, median(xs), *std::max_element(xs.begin(), xs.end()),
          std::sqrt(m.variance), m.skewness, m.kurtosis};
}

}  // namespace eyeid

#pragma once

#include <cmath>
#include <cstddef>
#include <span>

namespace warmdiff::stats {

inline double mean(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

/// Sample standard deviation (n - 1 denominator); 0 for fewer than two values.
inline double sample_sd(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

struct Interval {
  double estimate;
  double lo;
  double hi;
  bool excludes_zero() const { return lo > 0.0 || hi < 0.0; }
};

/// Normal-approximation 95% interval for the mean.
inline Interval mean_ci95(std::span<const double> xs) {
  const double m = mean(xs);
  const double half = xs.empty() ? 0.0 : 1.959963984540054 * sample_sd(xs) / std::sqrt(static_cast<double>(xs.size()));
  return {m, m - half, m + half};
}

}  // namespace warmdiff::stats

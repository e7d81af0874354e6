#pragma once

#include <span>
#include <vector>

namespace tailchain {

double normal_cdf(double x);
double normal_quantile(double p);
double normal_pdf(double x);

/// Standard Laplace distribution function and its inverse.
double laplace_cdf(double y);
double laplace_quantile(double p);

double mean(std::span<const double> x);
/// Unbiased sample variance (n - 1 denominator).
double variance(std::span<const double> x);
double stddev(std::span<const double> x);
double correlation(std::span<const double> x, std::span<const double> y);

/// Linear interpolation between order statistics at position (n - 1) p.
/// `sorted` must be ascending and non-empty.
double quantile_sorted(std::span<const double> sorted, double p);
double quantile(std::vector<double> values, double p);

/// Percentile interval [q((1 - level) / 2), q((1 + level) / 2)].
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double x) const { return lo <= x && x <= hi; }
};
Interval percentile_interval(std::vector<double> values, double level);

/// Two-sided one-sample Kolmogorov-Smirnov statistic against a continuous cdf.
template <class Cdf>
double ks_statistic(std::vector<double> sample, Cdf&& cdf);

}  // namespace tailchain

#include <algorithm>
#include <cmath>

namespace tailchain {

template <class Cdf>
double ks_statistic(std::vector<double> sample, Cdf&& cdf) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

}  // namespace tailchain

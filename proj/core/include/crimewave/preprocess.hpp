#pragma once

#include <span>
#include <vector>

#include "crimewave/events.hpp"

namespace crimewave {

/// Closed index interval [first, last] of a series.
struct IndexRange {
  std::size_t first = 0;
  std::size_t last = 0;

  std::size_t size() const { return last >= first ? last - first + 1 : 0; }
  bool contains(std::size_t i) const { return i >= first && i <= last; }
};

/// r(t) -> x(t) -> d(t) -> y(t), all of length N.
struct ProcessedSeries {
  std::vector<double> x;  // log10(r + 1)
  std::vector<double> d;  // x minus its one-year moving average
  std::vector<double> y;  // 5-week smoothed d
  IndexRange valid_range;
  double variance = 0.0;  // of y over valid_range

  std::size_t size() const { return y.size(); }

  /// Wraps an already processed series (e.g. synthetic y). The valid range
  /// is the whole series and the variance is computed over it.
  static ProcessedSeries from_values(std::vector<double> y);
};

inline constexpr int kTrendHalfWindow = 26;
inline constexpr int kSmoothWindow = 5;

std::vector<double> log_transform(std::span<const std::int64_t> counts);

/// M^{n1,n2}: mean of x(t+n) for n in [n1, n2), weight 1/(n2-n1). Near the
/// ends the mean is taken over the in-bounds samples only.
std::vector<double> moving_average(std::span<const double> x, int n1, int n2);

std::vector<double> detrend(std::span<const double> x);
std::vector<double> smooth(std::span<const double> d);

/// Population variance of `v` restricted to `range`.
double variance_over(std::span<const double> v, IndexRange range);

ProcessedSeries preprocess(const RawSeries& raw);

}  // namespace crimewave

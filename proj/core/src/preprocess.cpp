#include "crimewave/preprocess.hpp"

#include <cmath>

#include "crimewave/error.hpp"

namespace crimewave {

std::vector<double> log_transform(std::span<const std::int64_t> counts) {
  std::vector<double> x(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) {
    x[i] = std::log10(static_cast<double>(counts[i]) + 1.0);
  }
  return x;
}

std::vector<double> moving_average(std::span<const double> x, int n1, int n2) {
  if (n1 >= n2) fail(ErrorKind::Config, "moving_average: n1 must be < n2");
  if (x.size() < 2) fail(ErrorKind::Input, "moving_average: series shorter than 2 points");

  const auto n = static_cast<std::ptrdiff_t>(x.size());
  std::vector<double> out(x.size());
  for (std::ptrdiff_t t = 0; t < n; ++t) {
    const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, t + n1);
    const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(n, t + n2);  // exclusive
    double sum = 0.0;
    for (std::ptrdiff_t i = lo; i < hi; ++i) sum += x[static_cast<std::size_t>(i)];
    // A window can fall entirely outside when |n1| is large; fall back to x(t).
    out[static_cast<std::size_t>(t)] =
        hi > lo ? sum / static_cast<double>(hi - lo) : x[static_cast<std::size_t>(t)];
  }
  return out;
}

std::vector<double> detrend(std::span<const double> x) {
  if (x.size() < 2 * kTrendHalfWindow + 1) {
    fail(ErrorKind::Input, "detrend: need at least 53 weeks");
  }
  const auto trend = moving_average(x, -kTrendHalfWindow, kTrendHalfWindow);
  std::vector<double> d(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) d[i] = x[i] - trend[i];
  return d;
}

std::vector<double> smooth(std::span<const double> d) {
  if (d.size() < kSmoothWindow + 1) fail(ErrorKind::Input, "smooth: need at least 6 points");
  return moving_average(d, 0, kSmoothWindow);
}

double variance_over(std::span<const double> v, IndexRange range) {
  if (range.size() == 0 || range.last >= v.size()) return 0.0;
  double mean = 0.0;
  for (std::size_t i = range.first; i <= range.last; ++i) mean += v[i];
  mean /= static_cast<double>(range.size());
  double ss = 0.0;
  for (std::size_t i = range.first; i <= range.last; ++i) ss += (v[i] - mean) * (v[i] - mean);
  return ss / static_cast<double>(range.size());
}

ProcessedSeries ProcessedSeries::from_values(std::vector<double> y) {
  ProcessedSeries out;
  out.valid_range = {0, y.empty() ? 0 : y.size() - 1};
  out.variance = y.empty() ? 0.0 : variance_over(y, out.valid_range);
  out.y = std::move(y);
  return out;
}

ProcessedSeries preprocess(const RawSeries& raw) {
  ProcessedSeries out;
  out.x = log_transform(raw.counts);
  out.d = detrend(out.x);
  out.y = smooth(out.d);
  const std::size_t n = out.y.size();
  out.valid_range = {kTrendHalfWindow, n - kTrendHalfWindow - 1};
  out.variance = variance_over(out.y, out.valid_range);
  return out;
}

}  // namespace crimewave

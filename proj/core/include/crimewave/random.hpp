#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace crimewave {

/// SplitMix64 finalizer; turns (seed, stream index) into independent seeds so
/// that per-replicate and per-region streams do not depend on thread count.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return mix64(seed ^ mix64(stream + 0x632be59bd9b4e019ULL));
}

using Rng = std::mt19937_64;

/// Stationary AR(1) with lag-1 coefficient alpha and marginal standard
/// deviation sigma: x0 ~ N(0, sigma^2), x_t = alpha x_{t-1} + sqrt(1-alpha^2) sigma e_t.
inline std::vector<double> ar1_series(std::size_t n, double alpha, double sigma, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> x(n);
  if (n == 0) return x;
  const double innovation = sigma * std::sqrt(1.0 - alpha * alpha);
  x[0] = sigma * normal(rng);
  for (std::size_t t = 1; t < n; ++t) x[t] = alpha * x[t - 1] + innovation * normal(rng);
  return x;
}

}  // namespace crimewave

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include "crimewave/error.hpp"
#include "crimewave/wavelet.hpp"
#include "doctest.h"

using namespace crimewave;
using cd = std::complex<double>;

namespace {

// Transform by direct summation: sqrt(dt/s) sum_t y(t) conj(psi((t - n) dt / s)).
cd direct_coeff(const std::vector<double>& y, double s, std::size_t n, double dt = 1.0) {
  const double norm = std::pow(std::numbers::pi, -0.25);
  cd acc = 0.0;
  for (std::size_t t = 0; t < y.size(); ++t) {
    const double u = (static_cast<double>(t) - static_cast<double>(n)) * dt / s;
    acc += y[t] * norm * std::exp(-0.5 * u * u) * std::polar(1.0, -kOmega0 * u);
  }
  return std::sqrt(dt / s) * acc;
}

std::vector<double> white(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::vector<double> y(n);
  for (auto& v : y) v = g(rng);
  return y;
}

double max_rel_error(const WaveletTransform& w, const std::vector<double>& y) {
  double max_err = 0.0, max_ref = 0.0;
  for (std::size_t j = 0; j < w.n_scales(); ++j) {
    for (std::size_t t = 0; t < y.size(); ++t) {
      const cd ref = direct_coeff(y, w.grid().scales[j], t);
      max_err = std::max(max_err, std::abs(w.coeff(j, t) - ref));
      max_ref = std::max(max_ref, std::abs(ref));
    }
  }
  return max_err / max_ref;
}

}  // namespace

TEST_CASE("build_grid") {
  SUBCASE("J formula") {
    const auto g = build_grid(512, 2.0, 0.25);
    CHECK(g.J == 32);
    CHECK(g.size() == 33);
    CHECK(g.scales.front() == doctest::Approx(2.0));
    CHECK(g.scales.back() == doctest::Approx(512.0));
  }
  SUBCASE("coarse grid") {
    const auto g = build_grid(8, 2.0, 1.0, 1.0, true);
    CHECK(g.J == 2);
    REQUIRE(g.size() == 3);
    CHECK(g.scales[0] == doctest::Approx(2.0));
    CHECK(g.scales[1] == doctest::Approx(4.0));
    CHECK(g.scales[2] == doctest::Approx(8.0));
  }
  SUBCASE("fourier factor") {
    const double ratio = 4.0 * std::numbers::pi / (6.0 + std::sqrt(38.0));
    CHECK(fourier_factor() == doctest::Approx(ratio).epsilon(1e-14));
    CHECK(ratio == doctest::Approx(1.0330).epsilon(1e-4));
    const auto g = build_grid(520);
    for (std::size_t j = 0; j < g.size(); ++j) {
      CHECK(g.fourier_periods[j] / g.scales[j] == doctest::Approx(ratio).epsilon(1e-14));
      if (j > 0) CHECK(g.scales[j] > g.scales[j - 1]);
    }
  }
  SUBCASE("preconditions") {
    CHECK_THROWS_AS(build_grid(7), Error);
    CHECK_THROWS_AS(build_grid(512, 1.0), Error);
    CHECK_THROWS_AS(build_grid(512, 2.0, 0.0), Error);
    CHECK_THROWS_AS(build_grid(512, 2.0, 0.6), Error);
  }
}

TEST_CASE("band_indices circannual") {
  CHECK(kCircannual.lo_weeks() == doctest::Approx(41.6));
  CHECK(kCircannual.hi_weeks() == doctest::Approx(57.2));
  const auto g = build_grid(520);
  const auto idx = band_indices(g, kCircannual);
  REQUIRE_FALSE(idx.empty());
  for (std::size_t j = 0; j < g.size(); ++j) {
    const bool inside = g.fourier_periods[j] >= 41.6 && g.fourier_periods[j] <= 57.2;
    CHECK(inside == (std::find(idx.begin(), idx.end(), j) != idx.end()));
  }
}

TEST_CASE("cone of influence") {
  const auto coi = cone_of_influence(101);
  CHECK(coi[0] == 0.0);
  for (std::size_t t = 0; t < coi.size(); ++t) {
    CHECK(coi[t] >= 0.0);
    CHECK(coi[t] == coi[coi.size() - 1 - t]);
  }
  CHECK(coi[50] == doctest::Approx(50.0 / std::sqrt(2.0)));
}

TEST_CASE("transform") {
  SUBCASE("zero input") {
    const auto g = build_grid(64);
    const auto w = transform(std::vector<double>(64, 0.0), g);
    for (std::size_t j = 0; j < w.n_scales(); ++j)
      for (std::size_t t = 0; t < 64; ++t) CHECK(w.coeff(j, t) == cd(0.0, 0.0));
  }
  SUBCASE("matches direct summation") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      const auto y = white(128, seed);
      const auto g = build_grid(128, 4.0, 0.25);
      CHECK(max_rel_error(transform(y, g), y) <= 1e-8);
    }
    const auto y = white(256, 9);
    CHECK(max_rel_error(transform(y, build_grid(256, 4.0, 0.5)), y) <= 1e-8);
  }
  SUBCASE("sampled wavelet aliases below four steps") {
    // The analytic response is band-limited only for s >~ 4 dt; at s = 2 the
    // sampled Morlet leaks past Nyquist and the two paths part ways.
    const auto y = white(128, 4);
    const auto g = build_grid(128, 2.0, 0.25).slice(0, 0);
    CHECK(max_rel_error(transform(y, g), y) > 1e-3);
  }
  SUBCASE("cosine peak") {
    const std::size_t n = 512;
    std::vector<double> y(n);
    for (std::size_t t = 0; t < n; ++t) y[t] = std::cos(2.0 * std::numbers::pi * t / 64.0);
    const auto g = build_grid(n);
    const auto w = transform(y, g);
    std::size_t best = 0;
    for (std::size_t j = 0; j < g.size(); ++j)
      if (w.power(j, n / 2) > w.power(best, n / 2)) best = j;
    std::size_t nearest = 0;
    for (std::size_t j = 0; j < g.size(); ++j)
      if (std::abs(g.fourier_periods[j] - 64.0) < std::abs(g.fourier_periods[nearest] - 64.0))
        nearest = j;
    CHECK(static_cast<int>(best) - static_cast<int>(nearest) <= 1);
    CHECK(static_cast<int>(nearest) - static_cast<int>(best) <= 1);
  }
  SUBCASE("dimensions and length mismatch") {
    const auto g = build_grid(100);
    const auto w = transform(white(100, 5), g);
    CHECK(w.n_scales() == g.size());
    CHECK(w.n_steps() == 100);
    CHECK_THROWS_AS(transform(white(90, 5), g), Error);
  }
}

TEST_CASE("transform properties") {
  const std::size_t n = 256;
  const auto g = build_grid(n);
  const auto y1 = white(n, 21);
  const auto y2 = white(n, 22);

  SUBCASE("linearity") {
    const double a = 1.7, b = -0.4;
    std::vector<double> mix(n);
    for (std::size_t t = 0; t < n; ++t) mix[t] = a * y1[t] + b * y2[t];
    const auto w1 = transform(y1, g);
    const auto w2 = transform(y2, g);
    const auto wm = transform(mix, g);
    double err = 0.0, ref = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j) {
      for (std::size_t t = 0; t < n; ++t) {
        const cd expect = a * w1.coeff(j, t) + b * w2.coeff(j, t);
        err = std::max(err, std::abs(wm.coeff(j, t) - expect));
        ref = std::max(ref, std::abs(expect));
      }
    }
    CHECK(err / ref <= 1e-10);
  }

  SUBCASE("time-shift covariance") {
    // A burst in the middle, shifted by k steps; compare away from the ends.
    const std::size_t k = 17;
    std::vector<double> a(n, 0.0), b(n, 0.0);
    for (std::size_t t = 60; t < 160; ++t) a[t] = y1[t];
    for (std::size_t t = 60; t < 160; ++t) b[t + k] = y1[t];
    const auto small = build_grid(n, 2.0, 0.05).slice(0, 40);
    const auto wa = transform(a, small);
    const auto wb = transform(b, small);
    double dev = 0.0;
    for (std::size_t j = 0; j < small.size(); ++j)
      for (std::size_t t = 40; t + k < n - 40; ++t)
        dev = std::max(dev, std::abs(wb.coeff(j, t + k) - wa.coeff(j, t)));
    CHECK(dev <= 1e-8);
  }

  SUBCASE("variance reconstruction for white noise") {
    const std::size_t big = 4096;
    const auto y = white(big, 23);
    const auto grid = build_grid(big);
    const auto w = transform(y, grid);
    double total = 0.0;
    for (std::size_t j = 0; j < grid.size(); ++j) {
      double row = 0.0;
      for (std::size_t t = 0; t < big; ++t) row += w.power(j, t);
      total += row / grid.scales[j];
    }
    total *= grid.dj * grid.dt / (kCDelta * static_cast<double>(big));
    double mean = 0.0, var = 0.0;
    for (double v : y) mean += v;
    mean /= big;
    for (double v : y) var += (v - mean) * (v - mean);
    var /= big;
    CHECK(total == doctest::Approx(var).epsilon(0.05));
  }
}

TEST_CASE("global_spectrum") {
  SUBCASE("zero transform") {
    const auto g = build_grid(64);
    const auto gs = global_spectrum(transform(std::vector<double>(64, 0.0), g));
    for (double p : gs.power) CHECK(p == 0.0);
  }
  SUBCASE("planted sine peaks at its period") {
    const std::size_t n = 520;
    std::vector<double> y(n);
    for (std::size_t t = 0; t < n; ++t) y[t] = std::sin(2.0 * std::numbers::pi * t / 52.0);
    const auto g = build_grid(n);
    const auto gs = global_spectrum(transform(y, g));
    const auto peak = static_cast<std::size_t>(
        std::max_element(gs.power.begin(), gs.power.end()) - gs.power.begin());
    std::size_t nearest = 0;
    for (std::size_t j = 0; j < g.size(); ++j)
      if (std::abs(g.fourier_periods[j] - 52.0) < std::abs(g.fourier_periods[nearest] - 52.0))
        nearest = j;
    CHECK(std::abs(static_cast<int>(peak) - static_cast<int>(nearest)) <= 1);
  }
  SUBCASE("masked vs unmasked") {
    const std::size_t n = 512;
    const auto y = white(n, 31);
    const auto g = build_grid(n);
    const auto w = transform(y, g);
    const auto masked = global_spectrum(w, true);
    const auto full = global_spectrum(w, false);
    CHECK(masked.coi_masked);
    CHECK_FALSE(full.coi_masked);
    for (std::size_t j = 0; j < g.size(); ++j) {
      CHECK(full.n_avg[j] == n);
      CHECK(masked.n_avg[j] <= n);
      if (masked.n_avg[j] == n) CHECK(masked.power[j] == doctest::Approx(full.power[j]));
      CHECK(masked.power[j] >= 0.0);
    }
    // coi(t) = t/sqrt(2) >= 2 needs t >= 3: three steps drop at each end.
    CHECK(masked.n_avg[0] == n - 6);
  }
}

TEST_CASE("scale_avg_power") {
  const std::size_t n = 520;
  const auto g = build_grid(n);
  SUBCASE("zero input") {
    const auto p = scale_avg_power(transform(std::vector<double>(n, 0.0), g), kCircannual);
    for (double v : p.power) CHECK(v == 0.0);
    CHECK(p.c_delta == kCDelta);
    CHECK_FALSE(p.scale_indices.empty());
  }
  SUBCASE("stationary sine is flat inside the cone") {
    std::vector<double> y(n);
    for (std::size_t t = 0; t < n; ++t) y[t] = std::sin(2.0 * std::numbers::pi * t / 52.0);
    const auto p = scale_avg_power(transform(y, g), kCircannual);
    double sum = 0.0, sq = 0.0;
    std::size_t m = 0;
    for (std::size_t t = 0; t < n; ++t) {
      if (!p.valid[t]) continue;
      sum += p.power[t];
      sq += p.power[t] * p.power[t];
      ++m;
    }
    REQUIRE(m > 100);
    const double mean = sum / m;
    const double cv = std::sqrt(sq / m - mean * mean) / mean;
    CHECK(cv < 0.2);
  }
  SUBCASE("weights are dj dt / (C_delta s)") {
    const auto y = white(n, 41);
    const auto w = transform(y, g);
    const auto p = scale_avg_power(w, kCircannual);
    for (std::size_t t : {100u, 260u}) {
      double expect = 0.0;
      for (std::size_t j : p.scale_indices) expect += w.power(j, t) / g.scales[j];
      expect *= g.dj * g.dt / kCDelta;
      CHECK(p.power[t] == doctest::Approx(expect).epsilon(1e-12));
    }
  }
  SUBCASE("empty band") {
    CHECK_THROWS_AS(scale_avg_power(transform(white(n, 1), g), Band{0.01, 0.02}), Error);
  }
}

TEST_CASE("reconstruct_delta") {
  CHECK(reconstruct_delta() == doctest::Approx(0.776).epsilon(0.004 / 0.776));
  DeltaCalibration coarse;
  coarse.dj = 0.25;
  CHECK(reconstruct_delta(coarse) == doctest::Approx(0.776).epsilon(0.02));

  DeltaCalibration edge;
  edge.position = 0;
  edge.cone_only = true;
  CHECK(std::abs(reconstruct_delta(edge) - 0.776) > 0.1);
}

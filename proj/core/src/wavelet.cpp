#include "crimewave/wavelet.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <string>

#include "crimewave/error.hpp"
#include "fft.hpp"
#include "parallel.hpp"

namespace crimewave {
namespace {

constexpr double kPi = std::numbers::pi;
const double kPsi0 = std::pow(kPi, -0.25);  // Morlet psi(0)

// Gaussian tail beyond this many e-foldings is below double rounding.
constexpr double kGaussCutoff = 40.0;

}  // namespace

double fourier_factor(double omega0) {
  return 4.0 * kPi / (omega0 + std::sqrt(2.0 + omega0 * omega0));
}

ScaleGrid ScaleGrid::slice(std::size_t first, std::size_t last) const {
  if (first > last || last >= scales.size()) fail(ErrorKind::Config, "ScaleGrid::slice: bad range");
  ScaleGrid out = *this;
  out.scales.assign(scales.begin() + first, scales.begin() + last + 1);
  out.fourier_periods.assign(fourier_periods.begin() + first, fourier_periods.begin() + last + 1);
  out.s0 = out.scales.front();
  out.J = static_cast<int>(out.scales.size()) - 1;
  return out;
}

ScaleGrid build_grid(std::size_t n, double s0, double dj, double dt, bool relaxed) {
  if (!(dt > 0.0) || !(s0 > 0.0) || !(dj > 0.0)) {
    fail(ErrorKind::Config, "build_grid: s0, dj and dt must be positive");
  }
  if (!relaxed) {
    if (n < 8) fail(ErrorKind::Input, "build_grid: need N >= 8");
    if (s0 < 2.0 * dt) fail(ErrorKind::Config, "build_grid: s0 must be >= 2*dt");
    if (dj > 0.5) fail(ErrorKind::Config, "build_grid: dj must be <= 0.5");
  }
  const double octaves = std::log2(static_cast<double>(n) * dt / s0);
  // The epsilon keeps exact powers of two (e.g. 4*log2(256) = 32) from
  // rounding down.
  const int J = static_cast<int>(std::floor(octaves / dj + 1e-9));
  if (J < 1) fail(ErrorKind::Input, "build_grid: series too short for s0 (J < 1)");

  ScaleGrid g;
  g.s0 = s0;
  g.dj = dj;
  g.dt = dt;
  g.J = J;
  g.n = n;
  const double factor = fourier_factor();
  g.scales.resize(static_cast<std::size_t>(J) + 1);
  g.fourier_periods.resize(g.scales.size());
  for (int j = 0; j <= J; ++j) {
    g.scales[j] = s0 * std::exp2(j * dj);
    g.fourier_periods[j] = g.scales[j] * factor;
  }
  return g;
}

ScaleGrid build_grid_range(std::size_t n, double s0, double s_max, double dj, double dt) {
  ScaleGrid g = build_grid(n, s0, dj, dt, true);
  std::size_t last = 0;
  while (last + 1 < g.scales.size() && g.scales[last + 1] <= s_max * (1.0 + 1e-12)) ++last;
  return g.slice(0, last);
}

std::vector<std::size_t> band_indices(const ScaleGrid& grid, const Band& band) {
  if (!(band.lo_years < band.hi_years)) fail(ErrorKind::Config, "band bounds must be ordered");
  std::vector<std::size_t> idx;
  const double lo = band.lo_weeks(), hi = band.hi_weeks();
  for (std::size_t j = 0; j < grid.size(); ++j) {
    if (grid.fourier_periods[j] >= lo && grid.fourier_periods[j] <= hi) idx.push_back(j);
  }
  return idx;
}

std::vector<double> cone_of_influence(std::size_t n, double dt) {
  std::vector<double> coi(n);
  for (std::size_t t = 0; t < n; ++t) {
    const auto dist = static_cast<double>(std::min(t, n - 1 - t));
    coi[t] = dist * dt / std::numbers::sqrt2;
  }
  return coi;
}

std::size_t padded_length(std::size_t n, double s_max, double dt) {
  const auto guard = static_cast<std::size_t>(std::ceil(6.5 * s_max / dt));
  return std::bit_ceil(std::max(2 * n, n + guard));
}

WaveletTransform::WaveletTransform(ScaleGrid grid, std::vector<std::complex<double>> coeffs,
                                   std::vector<double> coi, double omega0)
    : grid_(std::move(grid)),
      n_(coi.size()),
      coeffs_(std::move(coeffs)),
      coi_(std::move(coi)),
      omega0_(omega0) {}

WaveletTransform transform(std::span<const double> y, const ScaleGrid& grid, double omega0) {
  const std::size_t n = y.size();
  if (n != grid.n) {
    fail(ErrorKind::Config, "transform: grid built for N=" + std::to_string(grid.n) +
                                " but series has " + std::to_string(n) + " steps");
  }
  if (grid.size() == 0) fail(ErrorKind::Config, "transform: empty grid");
  for (double v : y) {
    if (!std::isfinite(v)) fail(ErrorKind::Input, "transform: non-finite sample");
  }

  const double dt = grid.dt;
  const std::size_t m = padded_length(n, grid.scales.back(), dt);
  std::vector<std::complex<double>> spectrum(m);
  std::copy(y.begin(), y.end(), spectrum.begin());
  detail::fft_forward(spectrum);

  const std::size_t half = m / 2;
  std::vector<double> omega(half + 1);
  for (std::size_t k = 0; k <= half; ++k) {
    omega[k] = 2.0 * kPi * static_cast<double>(k) / (static_cast<double>(m) * dt);
  }

  std::vector<std::complex<double>> coeffs(grid.size() * n);
  detail::parallel_for(grid.size(), [&](std::size_t j) {
    const double s = grid.scales[j];
    const double norm = std::sqrt(2.0 * kPi * s / dt) * kPsi0 / static_cast<double>(m);
    std::vector<std::complex<double>> row(m);
    // Only w > 0 carries weight (analytic wavelet); k = 0 and negative
    // frequencies stay zero.
    for (std::size_t k = 1; k <= half; ++k) {
      const double arg = s * omega[k] - omega0;
      if (std::abs(arg) > kGaussCutoff) continue;
      row[k] = spectrum[k] * (norm * std::exp(-0.5 * arg * arg));
    }
    detail::fft_backward(row);
    std::copy_n(row.begin(), n, coeffs.begin() + static_cast<std::ptrdiff_t>(j * n));
  });

  return WaveletTransform(grid, std::move(coeffs), cone_of_influence(n, dt), omega0);
}

WaveletTransform transform(const ProcessedSeries& series, const ScaleGrid& grid, double omega0) {
  return transform(std::span<const double>(series.y), grid, omega0);
}

GlobalSpectrum global_spectrum(const WaveletTransform& w, bool coi_mask) {
  GlobalSpectrum g;
  g.grid = w.grid();
  g.coi_masked = coi_mask;
  g.power.assign(w.n_scales(), 0.0);
  g.n_avg.assign(w.n_scales(), 0);
  for (std::size_t j = 0; j < w.n_scales(); ++j) {
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t t = 0; t < w.n_steps(); ++t) {
      if (coi_mask && !w.in_cone(j, t)) continue;
      sum += w.power(j, t);
      ++count;
    }
    g.n_avg[j] = count;
    g.power[j] = count > 0 ? sum / static_cast<double>(count) : 0.0;
  }
  return g;
}

ScaleAvgPower scale_avg_power(const WaveletTransform& w, const Band& band) {
  ScaleAvgPower out;
  out.band = band;
  out.scale_indices = band_indices(w.grid(), band);
  if (out.scale_indices.empty()) {
    fail(ErrorKind::Config, "scale_avg_power: band contains no grid scale");
  }
  const auto& grid = w.grid();
  const double weight = grid.dj * grid.dt / out.c_delta;
  const double widest = grid.scales[out.scale_indices.back()];
  out.power.assign(w.n_steps(), 0.0);
  out.valid.assign(w.n_steps(), false);
  for (std::size_t t = 0; t < w.n_steps(); ++t) {
    double sum = 0.0;
    for (std::size_t j : out.scale_indices) sum += w.power(j, t) / grid.scales[j];
    out.power[t] = weight * sum;
    out.valid[t] = widest <= w.coi()[t];
  }
  return out;
}

double reconstruct_delta(const DeltaCalibration& cfg, double omega0) {
  if (cfg.position >= cfg.n) fail(ErrorKind::Config, "reconstruct_delta: impulse outside series");
  const ScaleGrid grid = build_grid(cfg.n, cfg.s0, cfg.dj, 1.0, true);
  std::vector<double> impulse(cfg.n, 0.0);
  impulse[cfg.position] = 1.0;
  const WaveletTransform w = transform(impulse, grid, omega0);
  double sum = 0.0;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    if (cfg.cone_only && !w.in_cone(j, cfg.position)) continue;
    sum += w.coeff(j, cfg.position).real() / std::sqrt(grid.scales[j]);
  }
  return cfg.dj * std::sqrt(grid.dt) / kPsi0 * sum;
}

}  // namespace crimewave

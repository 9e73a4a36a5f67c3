#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "crimewave/preprocess.hpp"

namespace crimewave {

inline constexpr double kOmega0 = 6.0;
inline constexpr double kCDelta = 0.776;  // Morlet, omega0 = 6
inline constexpr double kWeeksPerYear = 52.0;

/// Morlet Fourier period / scale, 4*pi/(omega0 + sqrt(2 + omega0^2)).
double fourier_factor(double omega0 = kOmega0);

/// Dyadic scales s_j = s0 * 2^(j*dj), j = 0..J, in weeks.
struct ScaleGrid {
  double s0 = 2.0;
  double dj = 0.05;
  double dt = 1.0;
  int J = 0;
  std::size_t n = 0;  // series length the grid was built for
  std::vector<double> scales;
  std::vector<double> fourier_periods;

  std::size_t size() const { return scales.size(); }

  /// Grid holding only scales [first, last] of this one (same dj, dt, n).
  ScaleGrid slice(std::size_t first, std::size_t last) const;
};

/// J = floor(log2(N*dt/s0)/dj). Requires N >= 8, s0 >= 2*dt, 0 < dj <= 0.5
/// unless `relaxed` is set (used for calibration grids).
ScaleGrid build_grid(std::size_t n, double s0 = 2.0, double dj = 0.05, double dt = 1.0,
                     bool relaxed = false);

/// Grid whose scales start at s0 and stop at s_max (inclusive up to rounding).
ScaleGrid build_grid_range(std::size_t n, double s0, double s_max, double dj,
                           double dt = 1.0);

/// Fourier-period band in years (converted at 52 weeks/year).
struct Band {
  double lo_years = 0.8;
  double hi_years = 1.1;

  double lo_weeks() const { return lo_years * kWeeksPerYear; }
  double hi_weeks() const { return hi_years * kWeeksPerYear; }
};

inline constexpr Band kCircannual{0.8, 1.1};

/// Grid indices whose Fourier period lies in the band.
std::vector<std::size_t> band_indices(const ScaleGrid& grid, const Band& band);

/// Continuous wavelet transform W(s_j, n), row-major over (scale, time).
class WaveletTransform {
 public:
  WaveletTransform(ScaleGrid grid, std::vector<std::complex<double>> coeffs,
                   std::vector<double> coi, double omega0);

  const ScaleGrid& grid() const { return grid_; }
  std::size_t n_scales() const { return grid_.size(); }
  std::size_t n_steps() const { return n_; }
  double dt() const { return grid_.dt; }
  double omega0() const { return omega0_; }

  std::complex<double> coeff(std::size_t j, std::size_t t) const { return coeffs_[j * n_ + t]; }
  double power(std::size_t j, std::size_t t) const { return std::norm(coeff(j, t)); }
  std::span<const std::complex<double>> row(std::size_t j) const {
    return {coeffs_.data() + j * n_, n_};
  }

  /// Largest reliable scale at each step: min(t, N-1-t)*dt/sqrt(2).
  const std::vector<double>& coi() const { return coi_; }
  bool in_cone(std::size_t j, std::size_t t) const { return grid_.scales[j] <= coi_[t]; }

 private:
  ScaleGrid grid_;
  std::size_t n_ = 0;
  std::vector<std::complex<double>> coeffs_;
  std::vector<double> coi_;
  double omega0_ = kOmega0;
};

std::vector<double> cone_of_influence(std::size_t n, double dt = 1.0);

/// Zero-padded length used by the spectral path: the next power of two that is
/// at least 2N and keeps the largest wavelet's envelope from wrapping around.
std::size_t padded_length(std::size_t n, double s_max, double dt = 1.0);

/// Morlet CWT computed spectrally. Each row multiplies the DFT of the padded
/// series by sqrt(2*pi*s/dt) * pi^(-1/4) * H(w) * exp(-(s*w - omega0)^2 / 2).
WaveletTransform transform(std::span<const double> y, const ScaleGrid& grid,
                           double omega0 = kOmega0);
WaveletTransform transform(const ProcessedSeries& series, const ScaleGrid& grid,
                           double omega0 = kOmega0);

struct GlobalSpectrum {
  std::vector<double> power;       // time-mean |W|^2 per scale
  std::vector<std::size_t> n_avg;  // steps averaged per scale
  ScaleGrid grid;
  bool coi_masked = false;
};

GlobalSpectrum global_spectrum(const WaveletTransform& w, bool coi_mask = true);

struct ScaleAvgPower {
  std::vector<double> power;  // per time step
  std::vector<bool> valid;    // every band scale inside the cone at this step
  Band band;
  double c_delta = kCDelta;
  std::vector<std::size_t> scale_indices;
};

/// (dj*dt/C_delta) * sum_{j in band} |W(s_j, n)|^2 / s_j.
ScaleAvgPower scale_avg_power(const WaveletTransform& w, const Band& band);

struct DeltaCalibration {
  double dj = 0.05;
  double s0 = 0.5;           // below 2*dt so the sum reaches the Nyquist cutoff
  std::size_t n = 512;
  std::size_t position = 256;
  bool cone_only = false;    // sum only coefficients inside the cone
};

/// Empirical C_delta from the transform of a unit impulse:
/// dj*sqrt(dt)/psi0(0) * sum_j Re W(s_j, n0) / sqrt(s_j).
double reconstruct_delta(const DeltaCalibration& cfg = {}, double omega0 = kOmega0);

}  // namespace crimewave

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "crimewave/preprocess.hpp"
#include "crimewave/wavelet.hpp"

namespace crimewave {

enum class SignificanceMethod { Analytic, MonteCarlo, Both };

SignificanceMethod parse_method(const std::string& name);
std::string to_string(SignificanceMethod method);

/// Red-noise null for one series.
struct SignificanceContext {
  double alpha = 0.0;               // AR(1) lag-1 coefficient
  double variance = 1.0;            // sigma^2 of the tested series
  std::vector<double> background;   // P_k at each grid scale
  double p_level = 0.95;
  int dof_local = 2;                // complex wavelet
  double gamma = 2.32;              // time-decorrelation factor (Morlet)
  double dj0 = 0.60;                // scale-decorrelation factor (Morlet)
};

enum class MaskKind { Pointwise, Global, ScaleAvg };

/// Outcome of a test. Pointwise masks are (scale x time) row-major; global
/// masks have one entry per scale; scale-averaged masks one per time step.
struct SignificanceMask {
  MaskKind kind = MaskKind::Pointwise;
  std::vector<double> threshold;  // per scale (pointwise/global) or size 1 (band)
  std::vector<bool> mask;
  std::size_t rows = 0;
  std::size_t cols = 0;
  bool coi_applied = true;
  SignificanceMethod method = SignificanceMethod::Analytic;

  bool at(std::size_t i) const { return mask[i]; }
  bool at(std::size_t j, std::size_t t) const { return mask[j * cols + t]; }
  std::size_t count() const;
};

/// alpha = (rho1 + sqrt(rho2)) / 2, falling back to rho1 when rho2 < 0, then
/// clamped to [0, 0.999]. Autocorrelations are taken over `range`.
double estimate_ar1(std::span<const double> y, IndexRange range);
double estimate_ar1(const ProcessedSeries& series);

/// P_k = (1 - a^2) / (1 + a^2 - 2a cos(2 pi k / N)) at k = N dt / lambda_j.
std::vector<double> background_spectrum(double alpha, const ScaleGrid& grid, std::size_t n);

/// Lower-tail quantile of the chi-square distribution.
double chi2_quantile(double p, double dof);

SignificanceContext make_context(const ProcessedSeries& series, const ScaleGrid& grid,
                                 double p_level = 0.95);
SignificanceContext make_context(double alpha, double variance, const ScaleGrid& grid,
                                 double p_level = 0.95);

/// sigma^2 * P_k * chi2_2(p) / 2 per scale.
std::vector<double> pointwise_threshold(const SignificanceContext& ctx, const ScaleGrid& grid);

/// Per-scale threshold for the time-averaged spectrum with
/// nu = 2 sqrt(1 + (n_avg dt / (gamma s))^2) degrees of freedom.
std::vector<double> global_threshold(const SignificanceContext& ctx, const ScaleGrid& grid,
                                     std::span<const std::size_t> n_avg);

/// Threshold for the scale-averaged power over the given grid indices.
double scale_avg_threshold(const SignificanceContext& ctx, const ScaleGrid& grid,
                           std::span<const std::size_t> scale_indices);

/// Coefficients above threshold; cone-excluded points are never significant.
SignificanceMask pointwise_mask(const WaveletTransform& w, const SignificanceContext& ctx);
SignificanceMask global_mask(const GlobalSpectrum& g, std::span<const double> threshold,
                             SignificanceMethod method = SignificanceMethod::Analytic);
SignificanceMask global_mask(const GlobalSpectrum& g, const SignificanceContext& ctx);
SignificanceMask scale_avg_mask(const ScaleAvgPower& p, double threshold,
                                SignificanceMethod method = SignificanceMethod::Analytic);

struct MonteCarloOptions {
  std::size_t replicates = 1000;
  std::uint64_t seed = 0;
  double p_level = 0.95;
  bool coi_mask = true;
};

/// Empirical p-quantile of the band power at cone-valid steps over AR(1)
/// surrogates with the given alpha, scaled by `variance`.
double montecarlo_scale_avg_threshold(double alpha, double variance, const ScaleGrid& grid,
                                      const Band& band, const MonteCarloOptions& opts);

/// Per-scale empirical p-quantile of the global spectrum over surrogates.
std::vector<double> montecarlo_global_threshold(double alpha, double variance,
                                                const ScaleGrid& grid,
                                                const MonteCarloOptions& opts);

/// {alpha, variance, p_level, per_scale_thresholds[], method}
std::string threshold_report_json(const SignificanceContext& ctx,
                                  std::span<const double> per_scale_thresholds,
                                  SignificanceMethod method);

}  // namespace crimewave

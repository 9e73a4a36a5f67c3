#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "crimewave/compose.hpp"
#include "crimewave/significance.hpp"
#include "crimewave/wavelet.hpp"

namespace crimewave {

/// Per-region analysis settings shared by the CLI and the acceptance suite.
struct AnalysisOptions {
  double s0 = 2.0;
  double dj = 0.05;
  double p_level = 0.95;
  std::vector<Band> bands{kCircannual};
  /// Analytic or MonteCarlo force one path for every test. Both computes
  /// both and applies the calibrated one: Monte-Carlo for the global test,
  /// analytic for the scale-averaged test.
  SignificanceMethod method = SignificanceMethod::Both;
  std::size_t mc_replicates = 1000;
  std::uint64_t seed = 1;
  bool coi_mask_global = true;
  double alpha_step = 0.01;  // Monte-Carlo thresholds are shared per alpha bucket
};

/// Which path decides the mask of each test under `method`.
SignificanceMethod operative_global(SignificanceMethod method);
SignificanceMethod operative_band(SignificanceMethod method);

/// Unit-variance Monte-Carlo thresholds per alpha bucket.
class ThresholdCache {
 public:
  ThresholdCache(const ScaleGrid& grid, const AnalysisOptions& opts);

  /// Computes the missing buckets for `alphas` (parallel over buckets).
  void prepare(std::span<const double> alphas);

  int bucket(double alpha) const;
  const std::vector<double>& global(double alpha) const;
  double band(double alpha, std::size_t band_index) const;

 private:
  struct Entry {
    std::vector<double> global;
    std::vector<double> bands;
  };
  ScaleGrid grid_;
  AnalysisOptions opts_;
  std::map<int, Entry> entries_;

  const Entry& entry(double alpha) const;
};

struct RegionAnalysis {
  int region_id = 0;
  double alpha = 0.0;
  double variance = 0.0;
  RegionGlobalResult global;
  std::vector<double> global_analytic;            // per-scale thresholds
  std::vector<double> global_montecarlo;          // empty unless computed
  std::vector<RegionBandResult> bands;            // one per option band
  std::vector<double> band_analytic;
  std::vector<double> band_montecarlo;
};

ScaleGrid analysis_grid(std::size_t n, const AnalysisOptions& opts);

/// Transform, estimate the red-noise null and test one series. `cache` must
/// have been prepared for the series' alpha when Monte-Carlo is needed.
RegionAnalysis analyze_series(const ProcessedSeries& series, const ScaleGrid& grid,
                              const AnalysisOptions& opts, const ThresholdCache* cache,
                              int region_id = 0);

/// Analyzes every series (parallel over regions) with a shared cache.
std::vector<RegionAnalysis> analyze_regions(std::span<const ProcessedSeries> series,
                                            std::span<const int> region_ids,
                                            const AnalysisOptions& opts);

}  // namespace crimewave

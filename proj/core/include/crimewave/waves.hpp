#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "crimewave/compose.hpp"
#include "crimewave/wavelet.hpp"

namespace crimewave {

/// A maximal stretch of consecutive significant, cone-valid weeks.
struct RunRecord {
  int region_id = 0;
  Band band;
  std::size_t start_week = 0;
  std::size_t end_week = 0;  // inclusive
  std::size_t duration = 0;  // end_week - start_week + 1
  bool truncated = false;    // touches the cone boundary or a series end
};

/// Runs of `mask && valid`. A run is truncated when the step before its start
/// or after its end is invalid or outside the series.
std::vector<RunRecord> extract_runs(const std::vector<bool>& mask, const std::vector<bool>& valid,
                                    int region_id = 0, const Band& band = kCircannual);
std::vector<RunRecord> extract_runs(const RegionBandResult& region, int region_id = 0);

enum class DurationModel { Exponential, StretchedExponential, PowerLaw, LogNormal };

inline constexpr DurationModel kAllDurationModels[] = {
    DurationModel::Exponential, DurationModel::StretchedExponential, DurationModel::PowerLaw,
    DurationModel::LogNormal};

std::string to_string(DurationModel model);

/// Survival function S(x) of each family on x >= 0:
///   exponential            exp(-x/tau)
///   stretched exponential  exp(-(x/tau)^beta), 0 < beta <= 1
///   power law (Lomax)      (1 + x/sigma)^(-a)
///   log-normal             1 - Phi((ln x - mu)/sigma)
/// A duration of k weeks has probability S(k-1) - S(k).
double log_survival(DurationModel model, std::span<const double> params, double x);
double log_pmf(DurationModel model, std::span<const double> params, std::int64_t k);

struct DurationFit {
  DurationModel model = DurationModel::Exponential;
  std::vector<std::pair<std::string, double>> params;
  double loglik = 0.0;
  double aic = 0.0;
  double ks_stat = 0.0;
  std::size_t n_samples = 0;

  double param(const std::string& name) const;
};

struct FitOptions {
  std::size_t min_samples = 30;
};

/// Maximum-likelihood fit of every candidate, ranked by AIC (ascending).
std::vector<DurationFit> fit_durations(std::span<const std::int64_t> samples,
                                       std::span<const DurationModel> candidates = kAllDurationModels,
                                       const FitOptions& opts = {});

struct SurveyOptions {
  FitOptions fit;
  bool include_truncated = false;
};

struct DurationSurvey {
  std::vector<RunRecord> runs;          // every run, truncated or not
  std::vector<std::int64_t> samples;    // durations handed to the fit
  std::vector<DurationFit> fits;        // empty when fitting failed
  std::optional<std::string> fit_error;
  std::size_t n_truncated = 0;
  std::size_t n_regions = 0;
  std::size_t regions_with_runs = 0;
  std::size_t series_length = 0;
  /// Among regions with at least one run, the share whose longest run is
  /// shorter than half the series.
  double moving_fraction = 0.0;
};

DurationSurvey duration_survey(std::span<const RegionBandResult> regions,
                               std::span<const int> region_ids, const SurveyOptions& opts = {});

/// region_id,start_week,end_week,duration,truncated
std::string runs_csv(std::span<const RunRecord> runs);
/// Per-model params, loglik, aic and ks, plus run counts.
std::string fits_json(const DurationSurvey& survey);

}  // namespace crimewave

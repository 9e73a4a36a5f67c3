#include "crimewave/pipeline.hpp"

#include <algorithm>
#include <cmath>

#include "crimewave/error.hpp"
#include "crimewave/random.hpp"
#include "parallel.hpp"

namespace crimewave {

namespace {

bool needs_montecarlo(SignificanceMethod method) { return method != SignificanceMethod::Analytic; }

}  // namespace

SignificanceMethod operative_global(SignificanceMethod method) {
  return method == SignificanceMethod::Analytic ? SignificanceMethod::Analytic
                                                : SignificanceMethod::MonteCarlo;
}

SignificanceMethod operative_band(SignificanceMethod method) {
  return method == SignificanceMethod::MonteCarlo ? SignificanceMethod::MonteCarlo
                                                  : SignificanceMethod::Analytic;
}

ThresholdCache::ThresholdCache(const ScaleGrid& grid, const AnalysisOptions& opts)
    : grid_(grid), opts_(opts) {
  if (!(opts.alpha_step > 0.0)) fail(ErrorKind::Config, "alpha_step must be positive");
}

int ThresholdCache::bucket(double alpha) const {
  return static_cast<int>(std::lround(alpha / opts_.alpha_step));
}

void ThresholdCache::prepare(std::span<const double> alphas) {
  std::vector<int> missing;
  for (double a : alphas) {
    const int b = bucket(a);
    if (!entries_.contains(b) && std::find(missing.begin(), missing.end(), b) == missing.end())
      missing.push_back(b);
  }
  std::sort(missing.begin(), missing.end());
  std::vector<Entry> fresh(missing.size());
  detail::parallel_for(missing.size(), [&](std::size_t i) {
    const double alpha = std::min(0.999, missing[i] * opts_.alpha_step);
    MonteCarloOptions mc;
    mc.replicates = opts_.mc_replicates;
    mc.p_level = opts_.p_level;
    mc.coi_mask = opts_.coi_mask_global;
    mc.seed = derive_seed(opts_.seed, static_cast<std::uint64_t>(missing[i]));
    fresh[i].global = montecarlo_global_threshold(alpha, 1.0, grid_, mc);
    mc.coi_mask = true;
    for (std::size_t b = 0; b < opts_.bands.size(); ++b) {
      mc.seed = derive_seed(opts_.seed, (std::uint64_t{b + 1} << 32) + missing[i]);
      fresh[i].bands.push_back(montecarlo_scale_avg_threshold(alpha, 1.0, grid_, opts_.bands[b], mc));
    }
  });
  for (std::size_t i = 0; i < missing.size(); ++i) entries_.emplace(missing[i], std::move(fresh[i]));
}

const ThresholdCache::Entry& ThresholdCache::entry(double alpha) const {
  const auto it = entries_.find(bucket(alpha));
  if (it == entries_.end()) fail(ErrorKind::Analysis, "threshold cache not prepared for alpha");
  return it->second;
}

const std::vector<double>& ThresholdCache::global(double alpha) const { return entry(alpha).global; }

double ThresholdCache::band(double alpha, std::size_t band_index) const {
  return entry(alpha).bands.at(band_index);
}

ScaleGrid analysis_grid(std::size_t n, const AnalysisOptions& opts) {
  return build_grid(n, opts.s0, opts.dj);
}

RegionAnalysis analyze_series(const ProcessedSeries& series, const ScaleGrid& grid,
                              const AnalysisOptions& opts, const ThresholdCache* cache,
                              int region_id) {
  RegionAnalysis out;
  out.region_id = region_id;
  const auto ctx = make_context(series, grid, opts.p_level);
  out.alpha = ctx.alpha;
  out.variance = ctx.variance;
  const bool mc = needs_montecarlo(opts.method);
  if (mc && cache == nullptr) fail(ErrorKind::Analysis, "Monte-Carlo thresholds requested without a cache");

  const auto w = transform(series, grid);
  out.global.spectrum = global_spectrum(w, opts.coi_mask_global);
  out.global_analytic = global_threshold(ctx, grid, out.global.spectrum.n_avg);
  if (mc) {
    out.global_montecarlo = cache->global(ctx.alpha);
    for (double& v : out.global_montecarlo) v *= ctx.variance;
  }
  const auto gm = operative_global(opts.method);
  out.global.mask = global_mask(out.global.spectrum,
                                gm == SignificanceMethod::MonteCarlo ? out.global_montecarlo
                                                                      : out.global_analytic,
                                gm);

  const auto bm = operative_band(opts.method);
  for (std::size_t b = 0; b < opts.bands.size(); ++b) {
    RegionBandResult r;
    r.power = scale_avg_power(w, opts.bands[b]);
    out.band_analytic.push_back(scale_avg_threshold(ctx, grid, r.power.scale_indices));
    if (mc) out.band_montecarlo.push_back(ctx.variance * cache->band(ctx.alpha, b));
    const double thr = bm == SignificanceMethod::MonteCarlo ? out.band_montecarlo.back()
                                                             : out.band_analytic.back();
    r.mask = scale_avg_mask(r.power, thr, bm);
    out.bands.push_back(std::move(r));
  }
  return out;
}

std::vector<RegionAnalysis> analyze_regions(std::span<const ProcessedSeries> series,
                                            std::span<const int> region_ids,
                                            const AnalysisOptions& opts) {
  if (series.size() != region_ids.size()) fail(ErrorKind::Config, "analyze_regions: id count mismatch");
  if (series.empty()) fail(ErrorKind::Input, "analyze_regions: no regions");
  const std::size_t n = series.front().size();
  for (const auto& s : series)
    if (s.size() != n) fail(ErrorKind::Input, "analyze_regions: series lengths differ");
  const ScaleGrid grid = analysis_grid(n, opts);

  ThresholdCache cache(grid, opts);
  if (needs_montecarlo(opts.method)) {
    std::vector<double> alphas(series.size());
    detail::parallel_for(series.size(), [&](std::size_t i) { alphas[i] = estimate_ar1(series[i]); });
    cache.prepare(alphas);
  }
  std::vector<RegionAnalysis> out(series.size());
  detail::parallel_for(series.size(), [&](std::size_t i) {
    out[i] = analyze_series(series[i], grid, opts, &cache, region_ids[i]);
  });
  return out;
}

}  // namespace crimewave

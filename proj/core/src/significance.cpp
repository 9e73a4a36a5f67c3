#include "crimewave/significance.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/distributions/chi_squared.hpp>
#include <nlohmann/json.hpp>

#include "crimewave/error.hpp"
#include "crimewave/random.hpp"
#include "parallel.hpp"

namespace crimewave {
namespace {

double empirical_quantile(std::vector<double>& values, double p) {
  if (values.empty()) fail(ErrorKind::Analysis, "montecarlo: no cone-valid samples");
  const auto rank = static_cast<std::size_t>(std::ceil(p * static_cast<double>(values.size())));
  const std::size_t k = std::min(values.size() - 1, rank == 0 ? 0 : rank - 1);
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(k), values.end());
  return values[k];
}

void check_p_level(double p) {
  if (!(p > 0.0 && p < 1.0)) fail(ErrorKind::Config, "p_level must lie in (0, 1)");
}

}  // namespace

SignificanceMethod parse_method(const std::string& name) {
  if (name == "analytic") return SignificanceMethod::Analytic;
  if (name == "montecarlo") return SignificanceMethod::MonteCarlo;
  if (name == "both") return SignificanceMethod::Both;
  fail(ErrorKind::Config, "unknown significance method '" + name + "'");
}

std::string to_string(SignificanceMethod method) {
  switch (method) {
    case SignificanceMethod::Analytic: return "analytic";
    case SignificanceMethod::MonteCarlo: return "montecarlo";
    case SignificanceMethod::Both: return "both";
  }
  return "analytic";
}

std::size_t SignificanceMask::count() const {
  return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), true));
}

double estimate_ar1(std::span<const double> y, IndexRange range) {
  if (range.size() < 3 || range.last >= y.size()) {
    fail(ErrorKind::Input, "estimate_ar1: need at least 3 points in the valid range");
  }
  const auto seg = y.subspan(range.first, range.size());
  double mean = 0.0;
  for (double v : seg) mean += v;
  mean /= static_cast<double>(seg.size());
  double c0 = 0.0, c1 = 0.0, c2 = 0.0;
  for (std::size_t i = 0; i < seg.size(); ++i) {
    const double a = seg[i] - mean;
    c0 += a * a;
    if (i + 1 < seg.size()) c1 += a * (seg[i + 1] - mean);
    if (i + 2 < seg.size()) c2 += a * (seg[i + 2] - mean);
  }
  // Relative test: a constant series leaves only rounding residue in c0.
  const double var = c0 / static_cast<double>(seg.size());
  if (!(var > 1e-24 * std::max(mean * mean, 1e-280))) {
    fail(ErrorKind::Input, "estimate_ar1: series has zero variance");
  }
  const double rho1 = c1 / c0;
  const double rho2 = c2 / c0;
  const double alpha = rho2 >= 0.0 ? 0.5 * (rho1 + std::sqrt(rho2)) : rho1;
  return std::clamp(alpha, 0.0, 0.999);
}

double estimate_ar1(const ProcessedSeries& series) {
  return estimate_ar1(series.y, series.valid_range);
}

std::vector<double> background_spectrum(double alpha, const ScaleGrid& grid, std::size_t n) {
  if (!(alpha >= 0.0 && alpha < 1.0)) fail(ErrorKind::Config, "background_spectrum: alpha must be in [0, 1)");
  const double nn = static_cast<double>(n);
  std::vector<double> p(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double k = nn * grid.dt / grid.fourier_periods[j];
    const double c = std::cos(2.0 * std::numbers::pi * k / nn);
    p[j] = (1.0 - alpha * alpha) / (1.0 + alpha * alpha - 2.0 * alpha * c);
  }
  return p;
}

double chi2_quantile(double p, double dof) {
  boost::math::chi_squared dist(dof);
  return boost::math::quantile(dist, p);
}

SignificanceContext make_context(double alpha, double variance, const ScaleGrid& grid,
                                 double p_level) {
  check_p_level(p_level);
  if (!(variance >= 0.0)) fail(ErrorKind::Input, "make_context: negative variance");
  SignificanceContext ctx;
  ctx.alpha = alpha;
  ctx.variance = variance;
  ctx.p_level = p_level;
  ctx.background = background_spectrum(alpha, grid, grid.n);
  return ctx;
}

SignificanceContext make_context(const ProcessedSeries& series, const ScaleGrid& grid,
                                 double p_level) {
  return make_context(estimate_ar1(series), series.variance, grid, p_level);
}

std::vector<double> pointwise_threshold(const SignificanceContext& ctx, const ScaleGrid& grid) {
  const double dof = ctx.dof_local;
  const double factor = chi2_quantile(ctx.p_level, dof) / dof;
  std::vector<double> thr(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) thr[j] = ctx.variance * ctx.background[j] * factor;
  return thr;
}

std::vector<double> global_threshold(const SignificanceContext& ctx, const ScaleGrid& grid,
                                     std::span<const std::size_t> n_avg) {
  if (n_avg.size() != grid.size()) fail(ErrorKind::Config, "global_threshold: n_avg size mismatch");
  std::vector<double> thr(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double na = static_cast<double>(std::max<std::size_t>(1, n_avg[j]));
    const double ratio = na * grid.dt / (ctx.gamma * grid.scales[j]);
    // With a single sample the local test applies unchanged.
    const double dof = n_avg[j] <= 1 ? ctx.dof_local : ctx.dof_local * std::sqrt(1.0 + ratio * ratio);
    thr[j] = ctx.variance * ctx.background[j] * chi2_quantile(ctx.p_level, dof) / dof;
  }
  return thr;
}

double scale_avg_threshold(const SignificanceContext& ctx, const ScaleGrid& grid,
                           std::span<const std::size_t> scale_indices) {
  if (scale_indices.empty()) fail(ErrorKind::Config, "scale_avg_threshold: empty band");
  double inv_sum = 0.0, weighted_p = 0.0;
  for (std::size_t j : scale_indices) {
    inv_sum += 1.0 / grid.scales[j];
    weighted_p += ctx.background[j] / grid.scales[j];
  }
  const double s_avg = 1.0 / inv_sum;
  const double p_bar = s_avg * weighted_p;
  const double n_a = static_cast<double>(scale_indices.size());
  const double s_mid = std::sqrt(grid.scales[scale_indices.front()] * grid.scales[scale_indices.back()]);
  const double decorrelation = n_a * grid.dj / ctx.dj0;
  const double dof = 2.0 * n_a * s_avg / s_mid * std::sqrt(1.0 + decorrelation * decorrelation);
  return grid.dj * grid.dt / kCDelta * ctx.variance * p_bar / s_avg *
         chi2_quantile(ctx.p_level, dof) / dof;
}

SignificanceMask pointwise_mask(const WaveletTransform& w, const SignificanceContext& ctx) {
  SignificanceMask m;
  m.kind = MaskKind::Pointwise;
  m.threshold = pointwise_threshold(ctx, w.grid());
  m.rows = w.n_scales();
  m.cols = w.n_steps();
  m.mask.assign(m.rows * m.cols, false);
  for (std::size_t j = 0; j < m.rows; ++j) {
    for (std::size_t t = 0; t < m.cols; ++t) {
      m.mask[j * m.cols + t] = w.in_cone(j, t) && w.power(j, t) > m.threshold[j];
    }
  }
  return m;
}

SignificanceMask global_mask(const GlobalSpectrum& g, std::span<const double> threshold,
                             SignificanceMethod method) {
  if (threshold.size() != g.power.size()) fail(ErrorKind::Config, "global_mask: threshold size mismatch");
  SignificanceMask m;
  m.kind = MaskKind::Global;
  m.method = method;
  m.coi_applied = g.coi_masked;
  m.threshold.assign(threshold.begin(), threshold.end());
  m.rows = 1;
  m.cols = g.power.size();
  m.mask.assign(m.cols, false);
  for (std::size_t j = 0; j < m.cols; ++j) m.mask[j] = g.n_avg[j] > 0 && g.power[j] > threshold[j];
  return m;
}

SignificanceMask global_mask(const GlobalSpectrum& g, const SignificanceContext& ctx) {
  return global_mask(g, global_threshold(ctx, g.grid, g.n_avg));
}

SignificanceMask scale_avg_mask(const ScaleAvgPower& p, double threshold, SignificanceMethod method) {
  SignificanceMask m;
  m.kind = MaskKind::ScaleAvg;
  m.method = method;
  m.threshold = {threshold};
  m.rows = 1;
  m.cols = p.power.size();
  m.mask.assign(m.cols, false);
  for (std::size_t t = 0; t < m.cols; ++t) m.mask[t] = p.valid[t] && p.power[t] > threshold;
  return m;
}

double montecarlo_scale_avg_threshold(double alpha, double variance, const ScaleGrid& grid,
                                      const Band& band, const MonteCarloOptions& opts) {
  check_p_level(opts.p_level);
  const auto idx = band_indices(grid, band);
  if (idx.empty()) fail(ErrorKind::Config, "montecarlo: band contains no grid scale");
  const ScaleGrid band_grid = grid.slice(idx.front(), idx.back());

  std::vector<std::vector<double>> samples(opts.replicates);
  detail::parallel_for(opts.replicates, [&](std::size_t r) {
    Rng rng(derive_seed(opts.seed, r));
    const auto y = ar1_series(grid.n, alpha, 1.0, rng);
    const auto w = transform(y, band_grid);
    const auto sap = scale_avg_power(w, band);
    auto& out = samples[r];
    for (std::size_t t = 0; t < sap.power.size(); ++t) {
      if (!opts.coi_mask || sap.valid[t]) out.push_back(sap.power[t]);
    }
  });
  std::vector<double> pooled;
  for (const auto& s : samples) pooled.insert(pooled.end(), s.begin(), s.end());
  return variance * empirical_quantile(pooled, opts.p_level);
}

std::vector<double> montecarlo_global_threshold(double alpha, double variance, const ScaleGrid& grid,
                                                const MonteCarloOptions& opts) {
  check_p_level(opts.p_level);
  const std::size_t n_scales = grid.size();
  std::vector<std::vector<double>> spectra(opts.replicates);
  detail::parallel_for(opts.replicates, [&](std::size_t r) {
    Rng rng(derive_seed(opts.seed, r));
    const auto y = ar1_series(grid.n, alpha, 1.0, rng);
    spectra[r] = global_spectrum(transform(y, grid), opts.coi_mask).power;
  });
  std::vector<double> thr(n_scales);
  std::vector<double> column(opts.replicates);
  for (std::size_t j = 0; j < n_scales; ++j) {
    for (std::size_t r = 0; r < opts.replicates; ++r) column[r] = spectra[r][j];
    thr[j] = variance * empirical_quantile(column, opts.p_level);
  }
  return thr;
}

std::string threshold_report_json(const SignificanceContext& ctx,
                                  std::span<const double> per_scale_thresholds,
                                  SignificanceMethod method) {
  nlohmann::ordered_json j;
  j["alpha"] = ctx.alpha;
  j["variance"] = ctx.variance;
  j["p_level"] = ctx.p_level;
  j["per_scale_thresholds"] = std::vector<double>(per_scale_thresholds.begin(), per_scale_thresholds.end());
  j["method"] = to_string(method);
  return j.dump(2);
}

}  // namespace crimewave

#include "crimewave/waves.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>

#include <boost/math/tools/minima.hpp>
#include <nlohmann/json.hpp>

#include "crimewave/csv.hpp"
#include "crimewave/error.hpp"

namespace crimewave {

std::vector<RunRecord> extract_runs(const std::vector<bool>& mask, const std::vector<bool>& valid,
                                    int region_id, const Band& band) {
  if (mask.size() != valid.size()) fail(ErrorKind::Input, "extract_runs: mask/valid size mismatch");
  const std::size_t n = mask.size();
  std::vector<RunRecord> runs;
  std::size_t t = 0;
  while (t < n) {
    if (!(mask[t] && valid[t])) {
      ++t;
      continue;
    }
    const std::size_t start = t;
    while (t < n && mask[t] && valid[t]) ++t;
    RunRecord r;
    r.region_id = region_id;
    r.band = band;
    r.start_week = start;
    r.end_week = t - 1;
    r.duration = t - start;
    r.truncated = start == 0 || !valid[start - 1] || t == n || !valid[t];
    runs.push_back(r);
  }
  return runs;
}

std::vector<RunRecord> extract_runs(const RegionBandResult& region, int region_id) {
  return extract_runs(region.mask.mask, region.power.valid, region_id, region.power.band);
}

std::string to_string(DurationModel model) {
  switch (model) {
    case DurationModel::Exponential: return "exponential";
    case DurationModel::StretchedExponential: return "stretched_exponential";
    case DurationModel::PowerLaw: return "power_law";
    case DurationModel::LogNormal: return "log_normal";
  }
  return "unknown";
}

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// log of the standard normal upper tail.
double log_upper_normal(double z) {
  if (z < 30.0) return std::log(0.5 * std::erfc(z / std::numbers::sqrt2));
  const double z2 = z * z;
  return -0.5 * z2 - std::log(z * std::sqrt(2.0 * std::numbers::pi)) + std::log1p(-1.0 / z2 + 3.0 / (z2 * z2));
}

// log(1 - e^d) for d <= 0.
double log1mexp(double d) {
  if (d >= 0.0) return kNegInf;
  return d > -std::numbers::ln2 ? std::log(-std::expm1(d)) : std::log1p(-std::exp(d));
}

std::size_t param_count(DurationModel model) {
  return model == DurationModel::Exponential ? 1 : 2;
}

std::vector<std::string> param_names(DurationModel model) {
  switch (model) {
    case DurationModel::Exponential: return {"tau"};
    case DurationModel::StretchedExponential: return {"tau", "beta"};
    case DurationModel::PowerLaw: return {"sigma", "a"};
    case DurationModel::LogNormal: return {"mu", "sigma"};
  }
  return {};
}

struct Histogram {
  std::vector<std::int64_t> values;
  std::vector<double> counts;
  double n = 0.0;
  std::int64_t max = 0;
};

Histogram make_histogram(std::span<const std::int64_t> samples) {
  std::map<std::int64_t, double> tally;
  for (auto s : samples) tally[s] += 1.0;
  Histogram h;
  for (const auto& [v, c] : tally) {
    h.values.push_back(v);
    h.counts.push_back(c);
  }
  h.n = static_cast<double>(samples.size());
  h.max = h.values.back();
  return h;
}

double loglik(DurationModel model, std::span<const double> params, const Histogram& h) {
  double ll = 0.0;
  for (std::size_t i = 0; i < h.values.size(); ++i) ll += h.counts[i] * log_pmf(model, params, h.values[i]);
  return std::isfinite(ll) ? ll : kNegInf;
}

struct Optimum {
  double x = 0.0;
  double value = std::numeric_limits<double>::infinity();  // negative log-likelihood
};

constexpr int kBrentBits = 30;

template <typename F>
Optimum brent(F&& f, double lo, double hi) {
  auto guarded = [&](double x) {
    const double v = f(x);
    return std::isfinite(v) ? v : 1e300;
  };
  std::uintmax_t iters = 200;
  const auto [x, v] = boost::math::tools::brent_find_minima(guarded, lo, hi, kBrentBits, iters);
  return {x, v};
}

struct Bracket {
  double lo, hi;
};

// Profile likelihood: for each outer bracket, minimize over the outer
// coordinate with the inner coordinate optimized at every outer step. The
// best bracket wins, which doubles as a multi-start.
template <typename MakeParams>
std::vector<double> profile_fit(DurationModel model, const Histogram& h, std::span<const Bracket> outer,
                                Bracket inner, MakeParams make) {
  auto inner_best = [&](double u) {
    return brent([&](double v) { return -loglik(model, make(u, v), h); }, inner.lo, inner.hi);
  };
  Optimum best;
  double best_v = 0.0;
  for (const auto& b : outer) {
    const Optimum o = brent([&](double u) { return inner_best(u).value; }, b.lo, b.hi);
    if (o.value < best.value) {
      best = o;
      best_v = inner_best(o.x).x;
    }
  }
  return make(best.x, best_v);
}

std::vector<Bracket> log_brackets(double lo, double hi, int pieces) {
  std::vector<Bracket> out;
  const double step = (hi - lo) / pieces;
  for (int i = 0; i < pieces; ++i) out.push_back({lo + i * step, lo + (i + 1) * step});
  return out;
}

std::vector<double> fit_params(DurationModel model, const Histogram& h) {
  const double log_max = std::log(static_cast<double>(h.max));
  switch (model) {
    case DurationModel::Exponential: {
      // Discretized exponential is geometric on k >= 1; closed-form MLE.
      double mean = 0.0;
      for (std::size_t i = 0; i < h.values.size(); ++i) mean += h.counts[i] * static_cast<double>(h.values[i]);
      mean /= h.n;
      return {-1.0 / std::log1p(-1.0 / mean)};
    }
    case DurationModel::StretchedExponential: {
      const Bracket outer[] = {{0.05, 0.45}, {0.45, 0.75}, {0.75, 1.0}};
      return profile_fit(model, h, outer, {std::log(0.01), log_max + std::log(100.0)},
                         [](double beta, double log_tau) { return std::vector<double>{std::exp(log_tau), beta}; });
    }
    case DurationModel::PowerLaw: {
      const auto outer = log_brackets(std::log(0.01), log_max + std::log(1e4), 4);
      return profile_fit(model, h, outer, {std::log(0.01), std::log(1e3)},
                         [](double log_sigma, double log_a) {
                           return std::vector<double>{std::exp(log_sigma), std::exp(log_a)};
                         });
    }
    case DurationModel::LogNormal: {
      const auto outer = log_brackets(std::log(0.02), std::log(20.0), 3);
      return profile_fit(model, h, outer, {-10.0, log_max + 10.0},
                         [](double log_sigma, double mu) { return std::vector<double>{mu, std::exp(log_sigma)}; });
    }
  }
  return {};
}

double ks_statistic(DurationModel model, std::span<const double> params, const Histogram& h) {
  double d = 0.0, cum = 0.0;
  std::size_t i = 0;
  for (std::int64_t k = 1; k <= h.max; ++k) {
    while (i < h.values.size() && h.values[i] <= k) cum += h.counts[i++];
    const double model_cdf = -std::expm1(log_survival(model, params, static_cast<double>(k)));
    d = std::max(d, std::abs(cum / h.n - model_cdf));
  }
  return d;
}

}  // namespace

double log_survival(DurationModel model, std::span<const double> params, double x) {
  if (x <= 0.0) return 0.0;
  switch (model) {
    case DurationModel::Exponential: return -x / params[0];
    case DurationModel::StretchedExponential: return -std::pow(x / params[0], params[1]);
    case DurationModel::PowerLaw: return -params[1] * std::log1p(x / params[0]);
    case DurationModel::LogNormal: return log_upper_normal((std::log(x) - params[0]) / params[1]);
  }
  return 0.0;
}

double log_pmf(DurationModel model, std::span<const double> params, std::int64_t k) {
  if (k < 1) return kNegInf;
  const double hi = log_survival(model, params, static_cast<double>(k - 1));
  const double lo = log_survival(model, params, static_cast<double>(k));
  return hi + log1mexp(lo - hi);
}

double DurationFit::param(const std::string& name) const {
  for (const auto& [k, v] : params) {
    if (k == name) return v;
  }
  fail(ErrorKind::Config, "DurationFit: no parameter '" + name + "'");
}

std::vector<DurationFit> fit_durations(std::span<const std::int64_t> samples,
                                       std::span<const DurationModel> candidates, const FitOptions& opts) {
  if (samples.size() < std::max<std::size_t>(opts.min_samples, 2)) {
    fail(ErrorKind::Analysis, "fit_durations: " + std::to_string(samples.size()) +
                                  " samples, need at least " + std::to_string(opts.min_samples));
  }
  for (auto s : samples) {
    if (s < 1) fail(ErrorKind::Input, "fit_durations: durations must be >= 1");
  }
  const Histogram h = make_histogram(samples);
  if (h.values.size() < 2) fail(ErrorKind::Analysis, "fit_durations: degenerate sample (all durations equal)");

  std::vector<DurationFit> fits;
  for (auto model : candidates) {
    const auto p = fit_params(model, h);
    DurationFit f;
    f.model = model;
    const auto names = param_names(model);
    for (std::size_t i = 0; i < p.size(); ++i) f.params.emplace_back(names[i], p[i]);
    f.loglik = loglik(model, p, h);
    f.aic = 2.0 * static_cast<double>(param_count(model)) - 2.0 * f.loglik;
    f.ks_stat = ks_statistic(model, p, h);
    f.n_samples = samples.size();
    fits.push_back(std::move(f));
  }
  std::stable_sort(fits.begin(), fits.end(), [](const auto& a, const auto& b) { return a.aic < b.aic; });
  return fits;
}

DurationSurvey duration_survey(std::span<const RegionBandResult> regions, std::span<const int> region_ids,
                               const SurveyOptions& opts) {
  if (region_ids.size() != regions.size()) fail(ErrorKind::Config, "duration_survey: id/region count mismatch");
  DurationSurvey out;
  out.n_regions = regions.size();
  std::size_t moving = 0;
  for (std::size_t i = 0; i < regions.size(); ++i) {
    out.series_length = std::max(out.series_length, regions[i].power.power.size());
    auto runs = extract_runs(regions[i], region_ids[i]);
    std::size_t longest = 0;
    for (const auto& r : runs) {
      longest = std::max(longest, r.duration);
      if (r.truncated) ++out.n_truncated;
      if (!r.truncated || opts.include_truncated) out.samples.push_back(static_cast<std::int64_t>(r.duration));
    }
    if (!runs.empty()) {
      ++out.regions_with_runs;
      if (2 * longest < regions[i].power.power.size()) ++moving;
    }
    out.runs.insert(out.runs.end(), runs.begin(), runs.end());
  }
  out.moving_fraction =
      out.regions_with_runs > 0 ? static_cast<double>(moving) / static_cast<double>(out.regions_with_runs) : 0.0;
  try {
    out.fits = fit_durations(out.samples, kAllDurationModels, opts.fit);
  } catch (const Error& e) {
    out.fit_error = e.what();
  }
  return out;
}

std::string runs_csv(std::span<const RunRecord> runs) {
  CsvTable table{"region_id", "start_week", "end_week", "duration", "truncated"};
  for (const auto& r : runs) {
    table.row({std::to_string(r.region_id), std::to_string(r.start_week), std::to_string(r.end_week),
               std::to_string(r.duration), r.truncated ? "1" : "0"});
  }
  return table.str();
}

std::string fits_json(const DurationSurvey& survey) {
  nlohmann::ordered_json j;
  j["n_runs"] = survey.runs.size();
  j["n_truncated"] = survey.n_truncated;
  j["n_samples"] = survey.samples.size();
  j["n_regions"] = survey.n_regions;
  j["regions_with_runs"] = survey.regions_with_runs;
  j["series_length"] = survey.series_length;
  j["moving_fraction"] = survey.moving_fraction;
  j["error"] = survey.fit_error ? nlohmann::ordered_json(*survey.fit_error) : nlohmann::ordered_json(nullptr);
  auto models = nlohmann::ordered_json::array();
  for (const auto& f : survey.fits) {
    nlohmann::ordered_json m;
    m["model"] = to_string(f.model);
    nlohmann::ordered_json params;
    for (const auto& [k, v] : f.params) params[k] = v;
    m["params"] = params;
    m["loglik"] = f.loglik;
    m["aic"] = f.aic;
    m["ks"] = f.ks_stat;
    models.push_back(m);
  }
  j["models"] = models;
  return j.dump(2);
}

}  // namespace crimewave

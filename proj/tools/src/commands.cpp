#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <spdlog/spdlog.h>

#include "artifacts.hpp"
#include "crimewave/csv.hpp"
#include "crimewave/error.hpp"
#include "crimewave/partition.hpp"
#include "crimewave/preprocess.hpp"
#include "crimewave/synth.hpp"
#include "crimewave_cli/cli.hpp"

namespace crimewave::cli {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

std::string band_tag(const Band& band) {
  return format_double(band.lo_years) + "_" + format_double(band.hi_years);
}

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

namespace {

std::string series_csv(const RawSeries& raw, const ProcessedSeries& s) {
  CsvTable t{"week", "r", "x", "d", "y"};
  for (std::size_t i = 0; i < s.size(); ++i) {
    t.row({std::to_string(i), std::to_string(raw.counts[i]), format_double(s.x[i]), format_double(s.d[i]),
           format_double(s.y[i])});
  }
  return t.str();
}

ojson sweep_json(const SweepResult& sweep) {
  ojson j;
  j["phi"] = sweep.phi;
  j["r_u"] = sweep.r_u;
  auto table = ojson::array();
  for (const auto& [r, count] : sweep.table) table.push_back({{"r", r}, {"regions_above_phi", count}});
  j["table"] = table;
  return j;
}

const std::vector<double>& operative_global_threshold(const RegionAnalysis& a) {
  return a.global.mask.method == SignificanceMethod::MonteCarlo ? a.global_montecarlo : a.global_analytic;
}

double operative_band_threshold(const RegionAnalysis& a, std::size_t b) {
  return a.bands[b].mask.method == SignificanceMethod::MonteCarlo ? a.band_montecarlo[b] : a.band_analytic[b];
}

std::string optional_value(const std::vector<double>& v, std::size_t i) {
  return v.empty() ? "" : format_double(v[i]);
}

ojson analysis_json(const RegionAnalysis& a, const AnalysisOptions& opts) {
  ojson j;
  j["region_id"] = a.region_id;
  j["alpha"] = a.alpha;
  j["variance"] = a.variance;
  j["global_method"] = to_string(a.global.mask.method);
  auto bands = ojson::array();
  for (std::size_t b = 0; b < a.bands.size(); ++b) {
    ojson bj;
    bj["band"] = {opts.bands[b].lo_years, opts.bands[b].hi_years};
    bj["method"] = to_string(a.bands[b].mask.method);
    bj["threshold"] = operative_band_threshold(a, b);
    bj["threshold_analytic"] = a.band_analytic[b];
    bj["threshold_montecarlo"] =
        a.band_montecarlo.empty() ? ojson(nullptr) : ojson(a.band_montecarlo[b]);
    bands.push_back(bj);
  }
  j["bands"] = bands;
  return j;
}

ParseReport read_events(const RunConfig& cfg) {
  auto report = load_events(cfg.events.string(), cfg.format);
  spdlog::info("events: {} kept, {} rejected, {} filtered", report.events.records.size(), report.rejected, report.filtered);
  return report;
}

ojson parse_summary(const ParseReport& r) {
  return {{"events", r.events.records.size()}, {"rejected", r.rejected}, {"filtered", r.filtered}};
}

}  // namespace

Summary cmd_analyze(const RunConfig& cfg) {
  Artifacts art(cfg.out);
  art.add_input("events", cfg.events);
  art.add_input("weights", cfg.weights);
  const auto report = read_events(cfg);
  const auto& events = report.events;
  const auto weights = load_weights(cfg.weights.string());

  ojson info;
  info["parse"] = parse_summary(report);
  int r = 0;
  if (cfg.r) {
    r = *cfg.r;
  } else {
    const auto sweep = region_sweep(events, weights, cfg.phi, cfg.r_values);
    r = sweep.r_u;
    art.write("sweep.json", sweep_json(sweep).dump(2) + "\n");
  }
  spdlog::info("partitioning into {} regions", r);
  const auto partition = split(weights, r);
  art.write("partition.json", partition_to_json(partition) + "\n");
  const auto assigned = assign_regions(events, partition);
  art.write("assignment.json", assignment_to_json(assigned, partition) + "\n");

  const auto window = default_window(events, cfg.week_epoch);
  std::vector<RawSeries> raws;
  std::vector<ProcessedSeries> series;
  std::vector<int> ids;
  CsvTable regions{"region_id", "population", "n_events", "mean_weekly_rate", "analyzed"};
  for (const auto& region : partition.regions) {
    auto raw = bin_weekly(assigned.regions[static_cast<std::size_t>(region.id)], window);
    raw.region_id = region.id;
    double total = 0.0;
    for (auto c : raw.counts) total += static_cast<double>(c);
    const double rate = total / static_cast<double>(raw.n_weeks());
    const bool analyzed = rate > cfg.phi;
    regions.row({std::to_string(region.id), format_double(region.population),
                 std::to_string(assigned.regions[static_cast<std::size_t>(region.id)].records.size()), format_double(rate),
                 analyzed ? "1" : "0"});
    if (!analyzed) continue;
    series.push_back(preprocess(raw));
    ids.push_back(region.id);
    raws.push_back(std::move(raw));
  }
  art.write("regions.csv", regions.str());
  if (ids.empty()) fail(ErrorKind::Analysis, "no region has a mean weekly rate above phi");
  spdlog::info("{} of {} regions above phi = {}; {} weeks from {}", ids.size(), r, cfg.phi, window.n_weeks,
               format_day(window.start));

  for (std::size_t i = 0; i < ids.size(); ++i) {
    art.write("series/region_" + std::to_string(ids[i]) + ".csv", series_csv(raws[i], series[i]));
  }

  const auto results = analyze_regions(series, ids, cfg.analysis);

  CsvTable global{"region_id", "period_weeks", "power", "n_avg", "threshold_analytic", "threshold_montecarlo",
                  "threshold", "significant"};
  auto thresholds = ojson::array();
  std::vector<RegionGlobalResult> globals;
  for (const auto& a : results) {
    const auto& g = a.global.spectrum;
    const auto& thr = operative_global_threshold(a);
    for (std::size_t j = 0; j < g.power.size(); ++j) {
      global.row({std::to_string(a.region_id), format_double(g.grid.fourier_periods[j]), format_double(g.power[j]),
                  std::to_string(g.n_avg[j]), format_double(a.global_analytic[j]),
                  optional_value(a.global_montecarlo, j), format_double(thr[j]), a.global.mask.at(j) ? "1" : "0"});
    }
    thresholds.push_back(analysis_json(a, cfg.analysis));
    globals.push_back(a.global);
  }
  art.write("global_spectra.csv", global.str());
  art.write("thresholds.json", thresholds.dump(2) + "\n");

  const auto composed = composed_spectrum(globals);
  art.write("composed_spectrum.csv", composed_spectrum_csv(composed));

  auto band_info = ojson::array();
  for (std::size_t b = 0; b < cfg.analysis.bands.size(); ++b) {
    std::vector<RegionBandResult> band_results;
    for (const auto& a : results) band_results.push_back(a.bands[b]);
    const auto tag = band_tag(cfg.analysis.bands[b]);
    const auto composed_band = composed_band_series(band_results, cfg.coi_policy);
    art.write("composed_band_" + tag + ".csv", composed_band_csv(composed_band));

    const auto survey = duration_survey(band_results, ids, cfg.survey);
    const std::string suffix = b == 0 ? "" : "_" + tag;
    art.write("runs" + suffix + ".csv", runs_csv(survey.runs));
    art.write("fits" + suffix + ".json", fits_json(survey) + "\n");

    ojson bi;
    bi["band"] = {cfg.analysis.bands[b].lo_years, cfg.analysis.bands[b].hi_years};
    bi["runs"] = survey.runs.size();
    bi["best_model"] = survey.fits.empty() ? ojson(nullptr) : ojson(to_string(survey.fits.front().model));
    band_info.push_back(bi);
  }

  info["r"] = r;
  info["analyzed_regions"] = ids.size();
  info["n_weeks"] = window.n_weeks;
  info["week_start"] = format_day(window.start);
  info["bands"] = band_info;
  Summary s;
  s.out = cfg.out;
  s.info = info;
  art.write("summary.json", info.dump(2) + "\n");
  s.files = art.commit("analyze", cfg.resolved);
  return s;
}

Summary cmd_citylevel(const RunConfig& cfg) {
  Artifacts art(cfg.out);
  art.add_input("events", cfg.events);
  const auto report = read_events(cfg);
  const auto window = default_window(report.events, cfg.week_epoch);
  const auto raw = bin_weekly(report.events, window);
  const auto series = preprocess(raw);
  const auto grid = analysis_grid(series.size(), cfg.analysis);

  ThresholdCache cache(grid, cfg.analysis);
  if (cfg.analysis.method != SignificanceMethod::Analytic) {
    const double alpha = estimate_ar1(series);
    cache.prepare(std::span<const double>(&alpha, 1));
  }
  const auto a = analyze_series(series, grid, cfg.analysis, &cache, 0);

  art.write("city_series.csv", series_csv(raw, series));

  const auto& g = a.global.spectrum;
  const auto& thr = operative_global_threshold(a);
  CsvTable global{"period_weeks", "power", "n_avg", "threshold_analytic", "threshold_montecarlo", "threshold",
                  "significant"};
  std::size_t tested = 0, below = 0, peak = 0;
  for (std::size_t j = 0; j < g.power.size(); ++j) {
    global.row({format_double(grid.fourier_periods[j]), format_double(g.power[j]), std::to_string(g.n_avg[j]),
                format_double(a.global_analytic[j]), optional_value(a.global_montecarlo, j), format_double(thr[j]),
                a.global.mask.at(j) ? "1" : "0"});
    if (g.n_avg[j] == 0) continue;
    ++tested;
    below += !a.global.mask.at(j);
    if (g.power[j] > g.power[peak] || g.n_avg[peak] == 0) peak = j;
  }
  art.write("city_global_spectrum.csv", global.str());

  ojson info;
  info["parse"] = parse_summary(report);
  info["n_weeks"] = window.n_weeks;
  info["week_start"] = format_day(window.start);
  info["alpha"] = a.alpha;
  info["variance"] = a.variance;
  info["global"] = {{"method", to_string(a.global.mask.method)},
                    {"tested_scales", tested},
                    {"scales_below_threshold", below},
                    {"fraction_below_threshold", tested ? static_cast<double>(below) / tested : 0.0},
                    {"peak_period_weeks", grid.fourier_periods[peak]},
                    {"peak_significant", a.global.mask.at(peak)}};
  auto bands = ojson::array();
  for (std::size_t b = 0; b < cfg.analysis.bands.size(); ++b) {
    const auto& band = a.bands[b];
    const double bthr = operative_band_threshold(a, b);
    CsvTable t{"week", "power", "valid", "threshold", "significant"};
    std::size_t valid = 0, sig = 0;
    for (std::size_t i = 0; i < band.power.power.size(); ++i) {
      t.row({std::to_string(i), format_double(band.power.power[i]), band.power.valid[i] ? "1" : "0",
             format_double(bthr), band.mask.at(i) ? "1" : "0"});
      valid += band.power.valid[i];
      sig += band.mask.at(i);
    }
    const auto tag = band_tag(cfg.analysis.bands[b]);
    art.write("city_band_" + tag + ".csv", t.str());
    // Band-limited global test: any significant scale inside the band.
    bool global_in_band = false;
    for (std::size_t j : band.power.scale_indices) global_in_band = global_in_band || a.global.mask.at(j);
    bands.push_back({{"band", {cfg.analysis.bands[b].lo_years, cfg.analysis.bands[b].hi_years}},
                     {"method", to_string(band.mask.method)},
                     {"threshold", bthr},
                     {"valid_weeks", valid},
                     {"significant_weeks", sig},
                     {"fraction_significant", valid ? static_cast<double>(sig) / valid : 0.0},
                     {"global_significant", global_in_band}});
  }
  info["bands"] = bands;
  info["thresholds"] = analysis_json(a, cfg.analysis);
  art.write("city_summary.json", info.dump(2) + "\n");

  Summary s;
  s.out = cfg.out;
  s.info = info;
  s.files = art.commit("citylevel", cfg.resolved);
  return s;
}

Summary cmd_partition(const RunConfig& cfg) {
  Artifacts art(cfg.out);
  art.add_input("weights", cfg.weights);
  const auto weights = load_weights(cfg.weights.string());
  ojson info;
  std::optional<EventSet> events;
  if (!cfg.events.empty()) {
    art.add_input("events", cfg.events);
    auto report = read_events(cfg);
    info["parse"] = parse_summary(report);
    events = std::move(report.events);
  }
  int r = 0;
  if (cfg.r) {
    r = *cfg.r;
  } else if (events) {
    const auto sweep = region_sweep(*events, weights, cfg.phi, cfg.r_values);
    r = sweep.r_u;
    art.write("sweep.json", sweep_json(sweep).dump(2) + "\n");
  } else {
    fail(ErrorKind::Config, "config: field 'r' is required when no events are given");
  }
  const auto partition = split(weights, r);
  art.write("partition.json", partition_to_json(partition) + "\n");
  if (events) {
    const auto assigned = assign_regions(*events, partition);
    art.write("assignment.json", assignment_to_json(assigned, partition) + "\n");
    info["outside"] = assigned.outside.records.size();
  }
  info["r"] = r;
  Summary s;
  s.out = cfg.out;
  s.info = info;
  s.files = art.commit("partition", cfg.resolved);
  return s;
}

Summary cmd_synth(const fs::path& config_path, const Overrides& overrides) {
  std::ifstream in(config_path, std::ios::binary);
  if (!in) fail(ErrorKind::Config, "config: cannot read config file '" + config_path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(ss.str());
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Config, std::string("config: invalid JSON: ") + e.what());
  }
  fs::path out;
  if (overrides.out) {
    out = *overrides.out;
  } else if (j.contains("out") && j.at("out").is_string()) {
    const fs::path p = j.at("out").get<std::string>();
    out = p.is_absolute() ? p : config_path.parent_path() / p;
  } else {
    fail(ErrorKind::Config, "config: missing output directory: set 'out' or pass --out");
  }
  j.erase("out");
  if (overrides.seed) j["seed"] = *overrides.seed;
  const auto cfg = synth_config_from_json(j.dump());

  Artifacts art(out);
  const auto resolved = synth_config_to_json(cfg);
  art.write("config.json", resolved + "\n");

  const auto truth = ground_truth(cfg);
  ojson gt;
  auto holds = ojson::array();
  for (std::size_t r = 0; r < truth.hold_durations.size(); ++r) {
    holds.push_back({{"region_id", r}, {"hold_durations", truth.hold_durations[r]}});
  }
  gt["regions"] = holds;
  art.write("ground_truth.json", gt.dump(2) + "\n");

  if (cfg.emit == EmitKind::Series) {
    CsvTable t{"week", "region_id", "y", "active"};
    for (int r = 0; r < cfg.n_regions; ++r) {
      const auto s = gen_region_series(cfg, r);
      for (std::size_t w = 0; w < s.y.size(); ++w) {
        t.row({std::to_string(w), std::to_string(r), format_double(s.y[w]), s.active[w] ? "1" : "0"});
      }
    }
    art.write("series.csv", t.str());
  } else {
    const auto weights = population_grid(cfg);
    if (cfg.n_regions & (cfg.n_regions - 1)) fail(ErrorKind::Config, "synth: emit=events needs a power-of-two n_regions");
    const auto partition = split(weights, cfg.n_regions);
    const auto synth = gen_event_stream(cfg, partition);
    art.write("events.csv", events_csv(synth.events));
    CsvTable w{"lat", "lon", "weight"};
    for (const auto& p : weights.points) w.row({format_double(p.lat), format_double(p.lon), format_double(p.weight)});
    art.write("weights.csv", w.str());
    art.write("partition.json", partition_to_json(partition) + "\n");
    CsvTable c{"region_id", "week", "count"};
    for (std::size_t r = 0; r < synth.counts.size(); ++r) {
      for (std::size_t wk = 0; wk < synth.counts[r].size(); ++wk) {
        c.row({std::to_string(r), std::to_string(wk), std::to_string(synth.counts[r][wk])});
      }
    }
    art.write("counts.csv", c.str());
  }
  Summary s;
  s.out = out;
  s.info = {{"n_regions", cfg.n_regions}, {"n_weeks", cfg.n_weeks}, {"seed", cfg.seed}};
  s.files = art.commit("synth", nlohmann::ordered_json::parse(resolved));
  return s;
}

}  // namespace crimewave::cli

#include "crimewave/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <nlohmann/json.hpp>

#include "crimewave/csv.hpp"
#include "crimewave/error.hpp"
#include "crimewave/ingest.hpp"
#include "crimewave/random.hpp"

namespace crimewave {

void SynthConfig::validate() const {
  if (n_regions < 1) fail(ErrorKind::Config, "synth: n_regions must be >= 1");
  if (n_weeks < 2) fail(ErrorKind::Config, "synth: n_weeks must be >= 2");
  if (!(alpha >= 0.0 && alpha < 1.0)) fail(ErrorKind::Config, "synth: alpha must be in [0, 1)");
  if (!(noise_sigma >= 0.0)) fail(ErrorKind::Config, "synth: noise_sigma must be >= 0");
  if (population_grid < 1) fail(ErrorKind::Config, "synth: population_grid must be >= 1");
  for (const auto& w : waves) {
    if (!(w.period_weeks >= 2.0)) fail(ErrorKind::Config, "synth: wave period must be >= 2 weeks");
    for (const auto& s : w.schedule) {
      if (s.region_id < 0 || s.region_id >= n_regions || s.start_week < 1 || s.end_week > n_weeks ||
          s.start_week > s.end_week) {
        fail(ErrorKind::Config, "synth: invalid schedule entry for region " + std::to_string(s.region_id));
      }
    }
  }
}

namespace {

constexpr std::uint64_t kNoiseStream = 0;
constexpr std::uint64_t kEventStream = 1ULL << 32;

std::vector<ScheduleEntry> schedule_from_json(const nlohmann::json& w, const SynthConfig& cfg,
                                              std::uint64_t seed) {
  std::vector<ScheduleEntry> out;
  if (w.contains("rotating")) {
    const auto& r = w.at("rotating");
    return rotating_schedule(cfg.n_regions, r.at("n_active").get<int>(), cfg.n_weeks, r.at("tau").get<double>(),
                             r.at("beta").get<double>(), r.value("seed", seed));
  }
  if (w.contains("all_regions")) {
    // Shorthand: active in regions [0, n) for the whole series.
    const int n = w.at("all_regions").get<int>();
    for (int i = 0; i < n; ++i) out.push_back({i, 1, cfg.n_weeks});
    return out;
  }
  for (const auto& e : w.value("schedule", nlohmann::json::array())) {
    out.push_back({e.at(0).get<int>(), e.at(1).get<int>(), e.at(2).get<int>()});
  }
  return out;
}

}  // namespace

SynthConfig synth_config_from_json(const std::string& text) {
  SynthConfig cfg;
  try {
    const auto j = nlohmann::json::parse(text);
    cfg.n_regions = j.value("n_regions", cfg.n_regions);
    cfg.n_weeks = j.value("n_weeks", cfg.n_weeks);
    cfg.alpha = j.value("alpha", cfg.alpha);
    cfg.noise_sigma = j.value("noise_sigma", cfg.noise_sigma);
    cfg.baseline = j.value("baseline", cfg.baseline);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.population_grid = j.value("population_grid", cfg.population_grid);
    const auto emit = j.value("emit", std::string("series"));
    if (emit == "series") {
      cfg.emit = EmitKind::Series;
    } else if (emit == "events") {
      cfg.emit = EmitKind::Events;
    } else {
      fail(ErrorKind::Config, "synth: emit must be 'series' or 'events'");
    }
    if (j.contains("start_date")) {
      const auto d = parse_day(j.at("start_date").get<std::string>(), "%Y-%m-%d");
      if (!d) fail(ErrorKind::Config, "synth: bad start_date");
      cfg.start_date = *d;
    }
    if (j.contains("bbox")) {
      const auto& b = j.at("bbox");
      cfg.bbox = {b.at("lat_min").get<double>(), b.at("lat_max").get<double>(), b.at("lon_min").get<double>(),
                  b.at("lon_max").get<double>()};
    }
    std::uint64_t wave_index = 0;
    for (const auto& w : j.value("waves", nlohmann::json::array())) {
      WaveSpec spec;
      spec.period_weeks = w.at("period_weeks").get<double>();
      spec.amplitude = w.at("amplitude").get<double>();
      spec.schedule = schedule_from_json(w, cfg, derive_seed(cfg.seed, 0xABCD0000ULL + wave_index++));
      cfg.waves.push_back(std::move(spec));
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Config, std::string("synth config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

std::string synth_config_to_json(const SynthConfig& cfg) {
  nlohmann::ordered_json j;
  j["n_regions"] = cfg.n_regions;
  j["n_weeks"] = cfg.n_weeks;
  j["alpha"] = cfg.alpha;
  j["noise_sigma"] = cfg.noise_sigma;
  j["baseline"] = cfg.baseline;
  j["seed"] = cfg.seed;
  j["emit"] = cfg.emit == EmitKind::Series ? "series" : "events";
  j["start_date"] = format_day(cfg.start_date);
  j["bbox"] = {{"lat_min", cfg.bbox.lat_min}, {"lat_max", cfg.bbox.lat_max},
               {"lon_min", cfg.bbox.lon_min}, {"lon_max", cfg.bbox.lon_max}};
  j["population_grid"] = cfg.population_grid;
  auto waves = nlohmann::ordered_json::array();
  for (const auto& w : cfg.waves) {
    nlohmann::ordered_json wj;
    wj["period_weeks"] = w.period_weeks;
    wj["amplitude"] = w.amplitude;
    auto sched = nlohmann::ordered_json::array();
    for (const auto& s : w.schedule) sched.push_back({s.region_id, s.start_week, s.end_week});
    wj["schedule"] = sched;
    waves.push_back(wj);
  }
  j["waves"] = waves;
  return j.dump(2);
}

std::vector<ScheduleEntry> rotating_schedule(int n_regions, int n_active, int n_weeks, double tau, double beta,
                                             std::uint64_t seed) {
  if (n_active < 1 || n_active >= n_regions) fail(ErrorKind::Config, "rotating: need 1 <= n_active < n_regions");
  if (!(tau > 0.0) || !(beta > 0.0)) fail(ErrorKind::Config, "rotating: tau and beta must be > 0");
  Rng rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  auto draw_hold = [&] {
    const double u = 1.0 - unif(rng);  // (0, 1]
    return std::max(1, static_cast<int>(std::ceil(tau * std::pow(-std::log(u), 1.0 / beta))));
  };

  // last_end[r]: last week region r was active (0 = never).
  std::vector<int> last_end(static_cast<std::size_t>(n_regions), 0);
  std::vector<bool> busy(static_cast<std::size_t>(n_regions), false);
  // A region still holding, or whose hold ended in `week`, is not eligible.
  auto pick_region = [&](int week) {
    std::vector<int> candidates;
    for (int r = 0; r < n_regions; ++r) {
      if (!busy[r] && last_end[r] < week) candidates.push_back(r);
    }
    if (candidates.empty()) {
      for (int r = 0; r < n_regions; ++r) {
        if (!busy[r]) candidates.push_back(r);
      }
    }
    std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
    return candidates[pick(rng)];
  };

  struct Slot {
    int region;
    int start;
    int end;
  };
  std::vector<Slot> slots;
  for (int s = 0; s < n_active; ++s) {
    const int region = pick_region(1);
    busy[region] = true;
    slots.push_back({region, 1, std::min(n_weeks, draw_hold())});
  }

  std::vector<ScheduleEntry> out;
  for (int week = 1; week <= n_weeks; ++week) {
    for (auto& slot : slots) {
      if (slot.end != week) continue;
      out.push_back({slot.region, slot.start, slot.end});
      busy[slot.region] = false;
      last_end[slot.region] = week;
    }
    if (week == n_weeks) break;
    for (auto& slot : slots) {
      if (slot.end != week) continue;
      const int region = pick_region(week);
      busy[region] = true;
      slot = {region, week + 1, std::min(n_weeks, week + draw_hold())};
    }
  }
  std::sort(out.begin(), out.end(), [](const ScheduleEntry& a, const ScheduleEntry& b) {
    return a.region_id != b.region_id ? a.region_id < b.region_id : a.start_week < b.start_week;
  });
  return out;
}

double region_phase(int region_id) {
  const double golden = 0.6180339887498949;
  const double frac = std::fmod(static_cast<double>(region_id) * golden, 1.0);
  return 2.0 * std::numbers::pi * frac;
}

RegionSeries gen_region_series(const SynthConfig& cfg, int region_id) {
  cfg.validate();
  if (region_id < 0 || region_id >= cfg.n_regions) fail(ErrorKind::Config, "synth: region id out of range");
  const auto n = static_cast<std::size_t>(cfg.n_weeks);
  Rng rng(derive_seed(cfg.seed, kNoiseStream + static_cast<std::uint64_t>(region_id)));
  RegionSeries out;
  out.y = ar1_series(n, cfg.alpha, cfg.noise_sigma, rng);
  out.active.assign(n, false);
  for (auto& v : out.y) v += cfg.baseline;
  const double phase = region_phase(region_id);
  for (const auto& w : cfg.waves) {
    for (const auto& s : w.schedule) {
      if (s.region_id != region_id) continue;
      for (int t = s.start_week; t <= s.end_week; ++t) {
        const auto i = static_cast<std::size_t>(t - 1);
        out.y[i] += w.amplitude * std::sin(2.0 * std::numbers::pi * t / w.period_weeks + phase);
        out.active[i] = true;
      }
    }
  }
  return out;
}

GroundTruth ground_truth(const SynthConfig& cfg) {
  cfg.validate();
  GroundTruth gt;
  gt.active.assign(static_cast<std::size_t>(cfg.n_regions), std::vector<bool>(static_cast<std::size_t>(cfg.n_weeks)));
  gt.hold_durations.resize(static_cast<std::size_t>(cfg.n_regions));
  for (const auto& w : cfg.waves) {
    for (const auto& s : w.schedule) {
      gt.hold_durations[s.region_id].push_back(s.duration());
      for (int t = s.start_week; t <= s.end_week; ++t) gt.active[s.region_id][t - 1] = true;
    }
  }
  return gt;
}

SynthEvents gen_event_stream(const SynthConfig& cfg, const Partition& partition) {
  cfg.validate();
  if (partition.r() != cfg.n_regions) {
    fail(ErrorKind::Config, "synth: partition has " + std::to_string(partition.r()) + " regions, config " +
                                std::to_string(cfg.n_regions));
  }
  SynthEvents out;
  std::vector<EventRecord> records;
  for (int region = 0; region < cfg.n_regions; ++region) {
    const auto series = gen_region_series(cfg, region);
    const auto& b = partition.regions[static_cast<std::size_t>(region)].bounds;
    // Stay off the rectangle edges so assignment never hits a tie.
    const double mlat = 1e-3 * (b.lat_max - b.lat_min), mlon = 1e-3 * (b.lon_max - b.lon_min);
    std::uniform_real_distribution<double> lat(b.lat_min + mlat, b.lat_max - mlat);
    std::uniform_real_distribution<double> lon(b.lon_min + mlon, b.lon_max - mlon);
    std::uniform_int_distribution<int> weekday(0, 6);
    Rng rng(derive_seed(cfg.seed, kEventStream + static_cast<std::uint64_t>(region)));
    auto& counts = out.counts.emplace_back(series.y.size());
    for (std::size_t t = 0; t < series.y.size(); ++t) {
      const auto c = static_cast<std::int64_t>(std::max(0.0, std::round(std::pow(10.0, series.y[t]) - 1.0)));
      counts[t] = c;
      const Day week = cfg.start_date + std::chrono::days(7 * static_cast<int>(t));
      for (std::int64_t e = 0; e < c; ++e) {
        const int wd = weekday(rng);
        const double la = lat(rng), lo = lon(rng);
        records.push_back({week + std::chrono::days(wd), la, lo, "theft"});
      }
    }
  }
  out.events = make_event_set(std::move(records));
  return out;
}

PopulationWeights population_grid(const SynthConfig& cfg) {
  const int side = cfg.population_grid;
  const auto& b = cfg.bbox;
  std::vector<WeightedPoint> pts;
  for (int i = 0; i < side; ++i) {
    for (int k = 0; k < side; ++k) {
      const double lat = b.lat_min + (b.lat_max - b.lat_min) * (i + 0.5) / side;
      const double lon = b.lon_min + (b.lon_max - b.lon_min) * (k + 0.5) / side;
      pts.push_back({lat, lon, 1.0});
    }
  }
  auto w = PopulationWeights::from_points(std::move(pts));
  return w;
}

std::string events_csv(const EventSet& events) {
  std::string out = "date,lat,lon,category\n";
  for (const auto& r : events.records) {
    out += format_day(r.day);
    out += ',';
    out += format_double(r.lat);
    out += ',';
    out += format_double(r.lon);
    out += ',';
    out += r.category;
    out += '\n';
  }
  return out;
}

}  // namespace crimewave

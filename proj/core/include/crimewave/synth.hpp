#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "crimewave/events.hpp"
#include "crimewave/partition.hpp"

namespace crimewave {

/// One planted hold: the wave is active in `region_id` for weeks
/// [start_week, end_week], 1-based and inclusive.
struct ScheduleEntry {
  int region_id = 0;
  int start_week = 1;
  int end_week = 1;

  int duration() const { return end_week - start_week + 1; }
  bool operator==(const ScheduleEntry&) const = default;
};

struct WaveSpec {
  double period_weeks = 52.0;
  double amplitude = 1.0;
  std::vector<ScheduleEntry> schedule;
};

enum class EmitKind { Series, Events };

struct SynthConfig {
  int n_regions = 1;
  int n_weeks = 520;
  double alpha = 0.5;        // AR(1) lag-1 coefficient
  double noise_sigma = 1.0;  // marginal standard deviation of the AR(1) part
  double baseline = 0.0;     // constant level added to every series
  std::vector<WaveSpec> waves;
  std::uint64_t seed = 1;
  EmitKind emit = EmitKind::Series;
  Day start_date = Day{std::chrono::year{2010} / std::chrono::January / 4};  // a Monday
  BoundingBox bbox{40.0, 40.2, -75.2, -75.0};
  int population_grid = 16;  // side of the uniform population lattice

  void validate() const;
};

SynthConfig synth_config_from_json(const std::string& text);
std::string synth_config_to_json(const SynthConfig& cfg);

/// Rotating membership: `n_active` slots each hold the wave in one region for
/// a stretched-exponential time ceil(tau * (-ln U)^(1/beta)) weeks, then move
/// to a region that was not active in the week the hold ended.
std::vector<ScheduleEntry> rotating_schedule(int n_regions, int n_active, int n_weeks, double tau,
                                             double beta, std::uint64_t seed);

/// Deterministic phase offset for a region in [0, 2 pi).
double region_phase(int region_id);

struct RegionSeries {
  std::vector<double> y;
  std::vector<bool> active;  // any wave active per week
};

/// baseline + AR(1)(alpha, sigma; seed, region) + sum of active waves
/// A sin(2 pi t / period + phase(region)), t = 1..n_weeks.
RegionSeries gen_region_series(const SynthConfig& cfg, int region_id);

struct GroundTruth {
  std::vector<std::vector<bool>> active;                // region x week
  std::vector<std::vector<std::int64_t>> hold_durations;  // per region
};

GroundTruth ground_truth(const SynthConfig& cfg);

struct SynthEvents {
  EventSet events;
  std::vector<std::vector<std::int64_t>> counts;  // region x week
};

/// Weekly counts max(0, round(10^y - 1)) placed uniformly within each week and
/// strictly inside each region rectangle.
SynthEvents gen_event_stream(const SynthConfig& cfg, const Partition& partition);

/// Uniform lattice of unit weights over the config bounding box.
PopulationWeights population_grid(const SynthConfig& cfg);

/// date,lat,lon,category
std::string events_csv(const EventSet& events);

}  // namespace crimewave

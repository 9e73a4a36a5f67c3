#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "crimewave/events.hpp"

namespace crimewave {

struct WeightedPoint {
  double lat = 0.0;
  double lon = 0.0;
  double weight = 0.0;  // resident persons
};

struct PopulationWeights {
  std::vector<WeightedPoint> points;
  double total = 0.0;

  /// Validates weights (> 0, finite coordinates) and computes the total.
  static PopulationWeights from_points(std::vector<WeightedPoint> points);
  BoundingBox bbox() const;
};

struct Region {
  int id = 0;
  BoundingBox bounds;
  double population = 0.0;
};

/// Axis-aligned rectangles of near-equal population. Region ids are assigned
/// depth-first, lower/left child first, so ids follow the bisection order.
struct Partition {
  std::vector<Region> regions;

  int r() const { return static_cast<int>(regions.size()); }

  /// Lowest-id region whose closed rectangle contains the point.
  std::optional<int> locate(double lat, double lon) const;
};

/// Recursive weighted-median bisection into r = 2^k leaves. Each node is cut
/// across its longest extent; the cut sits midway between two distinct
/// coordinates so no point straddles it.
Partition split(const PopulationWeights& weights, int r);

struct SweepResult {
  std::map<int, int> table;  // r -> regions whose mean weekly rate exceeds phi
  double phi = 1.0;
  int r_u = 1;
};

/// For each r, partition, assign events and count regions with mean
/// crimes/week above phi. r_u is the argmax (smallest r on ties).
SweepResult region_sweep(const EventSet& events, const PopulationWeights& weights,
                         double phi, std::span<const int> r_values);

/// Mean weekly counts per region for an already built partition.
std::vector<double> region_rates(const EventSet& events, const Partition& partition);

/// Reads "lat,lon,weight" rows (comma or tab, optional header).
PopulationWeights parse_weights(std::istream& in);
PopulationWeights load_weights(const std::string& path);

/// JSON list of {region_id, lat_min, lat_max, lon_min, lon_max, population}.
std::string partition_to_json(const Partition& partition);
Partition partition_from_json(const std::string& text);

}  // namespace crimewave

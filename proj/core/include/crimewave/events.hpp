#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace crimewave {

using Day = std::chrono::sys_days;

/// One geolocated offence record. Timestamps are kept at day resolution.
struct EventRecord {
  Day day;
  double lat = 0.0;
  double lon = 0.0;
  std::string category;
};

struct BoundingBox {
  double lat_min = 0.0;
  double lat_max = 0.0;
  double lon_min = 0.0;
  double lon_max = 0.0;

  bool contains(double lat, double lon) const {
    return lat >= lat_min && lat <= lat_max && lon >= lon_min && lon <= lon_max;
  }
};

/// Events sorted by day. `first_week_start`/`last_week_start` are the Monday
/// starts of the weeks holding the earliest and latest record.
struct EventSet {
  std::vector<EventRecord> records;
  Day first_week_start{};
  Day last_week_start{};
  BoundingBox bbox;

  std::size_t size() const { return records.size(); }
  bool empty() const { return records.empty(); }
};

/// Weekly counts r(t). The step is fixed at one week.
struct RawSeries {
  std::vector<std::int64_t> counts;
  Day week_start{};
  std::optional<int> region_id;

  std::size_t n_weeks() const { return counts.size(); }
  static constexpr double dt_weeks = 1.0;
};

/// Monday 00:00 UTC of the week containing `day`.
Day monday_of(Day day);

/// Sorts records by day and fills the derived span and bounding box.
EventSet make_event_set(std::vector<EventRecord> records);

}  // namespace crimewave

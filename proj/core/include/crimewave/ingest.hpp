#pragma once

#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "crimewave/events.hpp"
#include "crimewave/partition.hpp"

namespace crimewave {

/// Column mapping for delimited event exports. Municipal schemas differ, so
/// every column is addressed by header name.
struct FormatConfig {
  std::string timestamp_column = "date";
  std::string lat_column = "lat";
  std::string lon_column = "lon";
  std::string category_column;        // empty: no category column
  std::string timestamp_format = "%Y-%m-%d";  // strptime-style
  char delimiter = '\0';              // '\0': sniff comma vs tab from header
  std::set<std::string> categories;   // empty: keep all
};

struct ParseReport {
  EventSet events;
  std::size_t rejected = 0;  // malformed or out-of-range rows
  std::size_t filtered = 0;  // valid rows dropped by the category filter
};

ParseReport parse_events(std::istream& source, const FormatConfig& format);
ParseReport load_events(const std::string& path, const FormatConfig& format);

/// Parses one timestamp with a strptime-style format, truncated to the day.
std::optional<Day> parse_day(const std::string& text, const std::string& format);
std::string format_day(Day day);

/// Half-open span of whole weeks [start, start + 7*n_weeks).
struct WeekWindow {
  Day start{};
  int n_weeks = 0;

  Day end() const { return start + std::chrono::days(7 * n_weeks); }
};

/// Window from the Monday of the first event through the week of the last.
WeekWindow default_window(const EventSet& events, std::optional<Day> epoch = {});

RawSeries bin_weekly(const EventSet& events, const WeekWindow& window);

struct RegionAssignment {
  std::vector<EventSet> regions;  // indexed by region id
  EventSet outside;
};

RegionAssignment assign_regions(const EventSet& events, const Partition& partition);

/// One JSON record per region: {region_id, polygon, n_events}.
std::string assignment_to_json(const RegionAssignment& assignment,
                               const Partition& partition);

}  // namespace crimewave

#include "crimewave/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <nlohmann/json.hpp>

#include "crimewave/csv.hpp"
#include "crimewave/error.hpp"

namespace crimewave {

Day monday_of(Day day) {
  const std::chrono::weekday wd{day};
  return day - std::chrono::days(wd.iso_encoding() - 1);
}

EventSet make_event_set(std::vector<EventRecord> records) {
  std::stable_sort(records.begin(), records.end(),
                   [](const EventRecord& a, const EventRecord& b) { return a.day < b.day; });
  EventSet out;
  out.records = std::move(records);
  if (out.records.empty()) return out;
  out.first_week_start = monday_of(out.records.front().day);
  out.last_week_start = monday_of(out.records.back().day);
  auto& b = out.bbox;
  b.lat_min = b.lon_min = std::numeric_limits<double>::infinity();
  b.lat_max = b.lon_max = -std::numeric_limits<double>::infinity();
  for (const auto& r : out.records) {
    b.lat_min = std::min(b.lat_min, r.lat);
    b.lat_max = std::max(b.lat_max, r.lat);
    b.lon_min = std::min(b.lon_min, r.lon);
    b.lon_max = std::max(b.lon_max, r.lon);
  }
  return out;
}

std::optional<Day> parse_day(const std::string& text, const std::string& format) {
  std::tm tm{};
  std::istringstream in(text);
  in >> std::get_time(&tm, format.c_str());
  if (in.fail()) return std::nullopt;
  const std::chrono::year_month_day ymd{std::chrono::year{tm.tm_year + 1900},
                                        std::chrono::month{static_cast<unsigned>(tm.tm_mon + 1)},
                                        std::chrono::day{static_cast<unsigned>(tm.tm_mday)}};
  if (!ymd.ok()) return std::nullopt;
  return Day{ymd};
}

std::string format_day(Day day) {
  const std::chrono::year_month_day ymd{day};
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::optional<double> parse_number(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::size_t column_index(const std::vector<std::string>& header, const std::string& name) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (trim(header[i]) == name) return i;
  }
  fail(ErrorKind::Input, "missing mapped column '" + name + "'");
}

}  // namespace

ParseReport parse_events(std::istream& source, const FormatConfig& format) {
  std::string line;
  if (!std::getline(source, line)) fail(ErrorKind::Input, "event source is empty or unreadable");
  if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
  char delim = format.delimiter;
  if (delim == '\0') delim = (line.find('\t') != std::string::npos && line.find(',') == std::string::npos) ? '\t' : ',';

  const auto header = split_delimited(line, delim);
  const std::size_t i_time = column_index(header, format.timestamp_column);
  const std::size_t i_lat = column_index(header, format.lat_column);
  const std::size_t i_lon = column_index(header, format.lon_column);
  const std::optional<std::size_t> i_cat =
      format.category_column.empty() ? std::nullopt : std::optional(column_index(header, format.category_column));
  if (!format.categories.empty() && !i_cat) {
    fail(ErrorKind::Config, "category filter configured without a category column");
  }
  const std::size_t needed = std::max({i_time, i_lat, i_lon, i_cat.value_or(0)}) + 1;

  ParseReport report;
  std::vector<EventRecord> records;
  while (std::getline(source, line)) {
    if (trim(line).empty()) continue;
    const auto fields = split_delimited(line, delim);
    if (fields.size() < needed) {
      ++report.rejected;
      continue;
    }
    const auto lat = parse_number(fields[i_lat]);
    const auto lon = parse_number(fields[i_lon]);
    const auto day = parse_day(std::string(trim(fields[i_time])), format.timestamp_format);
    if (!lat || !lon || !day || *lat < -90.0 || *lat > 90.0 || *lon < -180.0 || *lon > 180.0) {
      ++report.rejected;
      continue;
    }
    EventRecord rec{*day, *lat, *lon, i_cat ? std::string(trim(fields[*i_cat])) : std::string()};
    if (!format.categories.empty() && !format.categories.contains(rec.category)) {
      ++report.filtered;
      continue;
    }
    records.push_back(std::move(rec));
  }
  if (source.bad()) fail(ErrorKind::Input, "error while reading event source");
  if (records.empty()) fail(ErrorKind::Input, "event source has zero valid rows");
  report.events = make_event_set(std::move(records));
  return report;
}

ParseReport load_events(const std::string& path, const FormatConfig& format) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Input, "cannot read events file '" + path + "'");
  return parse_events(in, format);
}

WeekWindow default_window(const EventSet& events, std::optional<Day> epoch) {
  if (events.empty()) fail(ErrorKind::Input, "default_window: no events");
  WeekWindow w;
  w.start = epoch ? *epoch : events.first_week_start;
  const auto span = (events.records.back().day - w.start).count();
  if (span < 0) fail(ErrorKind::Config, "default_window: epoch after the last event");
  w.n_weeks = static_cast<int>(span / 7 + 1);
  return w;
}

RawSeries bin_weekly(const EventSet& events, const WeekWindow& window) {
  if (window.n_weeks <= 0) fail(ErrorKind::Config, "bin_weekly: window is empty or inverted");
  RawSeries out;
  out.week_start = window.start;
  out.counts.assign(static_cast<std::size_t>(window.n_weeks), 0);
  const Day end = window.end();
  for (const auto& r : events.records) {
    if (r.day < window.start || r.day >= end) continue;
    const auto idx = (r.day - window.start).count() / 7;
    ++out.counts[static_cast<std::size_t>(idx)];
  }
  return out;
}

RegionAssignment assign_regions(const EventSet& events, const Partition& partition) {
  std::vector<std::vector<EventRecord>> buckets(partition.regions.size());
  std::vector<EventRecord> outside;
  for (const auto& r : events.records) {
    if (auto id = partition.locate(r.lat, r.lon)) {
      buckets[static_cast<std::size_t>(*id)].push_back(r);
    } else {
      outside.push_back(r);
    }
  }
  RegionAssignment out;
  out.regions.reserve(buckets.size());
  for (auto& b : buckets) out.regions.push_back(make_event_set(std::move(b)));
  out.outside = make_event_set(std::move(outside));
  return out;
}

std::string assignment_to_json(const RegionAssignment& assignment, const Partition& partition) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& region : partition.regions) {
    const auto& b = region.bounds;
    nlohmann::ordered_json rec;
    rec["region_id"] = region.id;
    // Closed ring of [lon, lat] pairs.
    rec["polygon"] = {{b.lon_min, b.lat_min}, {b.lon_max, b.lat_min}, {b.lon_max, b.lat_max},
                      {b.lon_min, b.lat_max}, {b.lon_min, b.lat_min}};
    rec["n_events"] = assignment.regions.at(static_cast<std::size_t>(region.id)).size();
    arr.push_back(rec);
  }
  return arr.dump(2);
}

}  // namespace crimewave

#include "crimewave/partition.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include <nlohmann/json.hpp>

#include "crimewave/csv.hpp"
#include "crimewave/error.hpp"
#include "crimewave/ingest.hpp"
#include "parallel.hpp"

namespace crimewave {

PopulationWeights PopulationWeights::from_points(std::vector<WeightedPoint> points) {
  PopulationWeights w;
  for (const auto& p : points) {
    if (!(p.weight > 0.0) || !std::isfinite(p.weight)) fail(ErrorKind::Input, "population weights must be > 0");
    if (!(p.lat >= -90.0 && p.lat <= 90.0 && p.lon >= -180.0 && p.lon <= 180.0)) {
      fail(ErrorKind::Input, "population point outside lat/lon range");
    }
    w.total += p.weight;
  }
  if (!(w.total > 0.0)) fail(ErrorKind::Input, "population weights are empty");
  w.points = std::move(points);
  return w;
}

BoundingBox PopulationWeights::bbox() const {
  BoundingBox b{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
                std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const auto& p : points) {
    b.lat_min = std::min(b.lat_min, p.lat);
    b.lat_max = std::max(b.lat_max, p.lat);
    b.lon_min = std::min(b.lon_min, p.lon);
    b.lon_max = std::max(b.lon_max, p.lon);
  }
  return b;
}

std::optional<int> Partition::locate(double lat, double lon) const {
  std::optional<int> best;
  for (const auto& r : regions) {
    if (r.bounds.contains(lat, lon) && (!best || r.id < *best)) best = r.id;
  }
  return best;
}

namespace {

enum class Axis { Lat, Lon };

double coord(const WeightedPoint& p, Axis a) { return a == Axis::Lat ? p.lat : p.lon; }

class Bisector {
 public:
  explicit Bisector(const std::vector<WeightedPoint>& pts) : pts_(pts) {}

  void run(std::vector<std::size_t> idx, BoundingBox rect, int levels, std::vector<Region>& out) const {
    if (levels == 0) {
      double pop = 0.0;
      for (auto i : idx) pop += pts_[i].weight;
      out.push_back({static_cast<int>(out.size()), rect, pop});
      return;
    }
    const auto [lat_lo, lat_hi] = extent(idx, Axis::Lat);
    const auto [lon_lo, lon_hi] = extent(idx, Axis::Lon);
    Axis axis = (lat_hi - lat_lo) >= (lon_hi - lon_lo) ? Axis::Lat : Axis::Lon;
    std::optional<std::pair<std::size_t, double>> cut = find_cut(idx, axis);
    if (!cut) {
      axis = axis == Axis::Lat ? Axis::Lon : Axis::Lat;
      cut = find_cut(idx, axis);
    }
    if (!cut) fail(ErrorKind::Input, "split: r exceeds the number of distinct point coordinates");

    // find_cut leaves idx sorted along `axis`.
    std::vector<std::size_t> left(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(cut->first));
    std::vector<std::size_t> right(idx.begin() + static_cast<std::ptrdiff_t>(cut->first), idx.end());
    BoundingBox lrect = rect, rrect = rect;
    if (axis == Axis::Lat) {
      lrect.lat_max = rrect.lat_min = cut->second;
    } else {
      lrect.lon_max = rrect.lon_min = cut->second;
    }
    run(std::move(left), lrect, levels - 1, out);
    run(std::move(right), rrect, levels - 1, out);
  }

 private:
  std::pair<double, double> extent(const std::vector<std::size_t>& idx, Axis a) const {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (auto i : idx) {
      lo = std::min(lo, coord(pts_[i], a));
      hi = std::max(hi, coord(pts_[i], a));
    }
    return {lo, hi};
  }

  // Weighted median along the axis: the gap between two distinct coordinates
  // whose left weight is closest to half of the node total.
  std::optional<std::pair<std::size_t, double>> find_cut(std::vector<std::size_t>& idx, Axis a) const {
    const Axis other = a == Axis::Lat ? Axis::Lon : Axis::Lat;
    std::sort(idx.begin(), idx.end(), [&](std::size_t l, std::size_t r) {
      const double cl = coord(pts_[l], a), cr = coord(pts_[r], a);
      if (cl != cr) return cl < cr;
      const double ol = coord(pts_[l], other), orr = coord(pts_[r], other);
      if (ol != orr) return ol < orr;
      return l < r;
    });
    double total = 0.0;
    for (auto i : idx) total += pts_[i].weight;
    std::optional<std::pair<std::size_t, double>> best;
    double best_err = std::numeric_limits<double>::infinity();
    double cum = 0.0;
    for (std::size_t k = 1; k < idx.size(); ++k) {
      cum += pts_[idx[k - 1]].weight;
      const double prev = coord(pts_[idx[k - 1]], a), here = coord(pts_[idx[k]], a);
      if (prev == here) continue;
      const double err = std::abs(cum - 0.5 * total);
      if (err < best_err) {
        best_err = err;
        best = std::pair{k, 0.5 * (prev + here)};
      }
    }
    return best;
  }

  const std::vector<WeightedPoint>& pts_;
};

}  // namespace

Partition split(const PopulationWeights& weights, int r) {
  if (r < 1 || !std::has_single_bit(static_cast<unsigned>(r))) {
    fail(ErrorKind::Config, "split: r must be a power of two");
  }
  if (weights.points.size() < static_cast<std::size_t>(r)) {
    fail(ErrorKind::Input, "split: fewer weighted points than regions");
  }
  std::vector<std::size_t> idx(weights.points.size());
  std::iota(idx.begin(), idx.end(), 0);
  Partition p;
  p.regions.reserve(static_cast<std::size_t>(r));
  Bisector(weights.points).run(std::move(idx), weights.bbox(), std::countr_zero(static_cast<unsigned>(r)), p.regions);
  return p;
}

std::vector<double> region_rates(const EventSet& events, const Partition& partition) {
  const auto window = default_window(events);
  const auto assignment = assign_regions(events, partition);
  std::vector<double> rates;
  rates.reserve(assignment.regions.size());
  for (const auto& region : assignment.regions) {
    rates.push_back(static_cast<double>(region.size()) / window.n_weeks);
  }
  return rates;
}

SweepResult region_sweep(const EventSet& events, const PopulationWeights& weights, double phi,
                         std::span<const int> r_values) {
  if (events.empty()) fail(ErrorKind::Input, "region_sweep: empty event set");
  if (!(phi > 0.0)) fail(ErrorKind::Config, "region_sweep: phi must be > 0");
  if (r_values.empty()) fail(ErrorKind::Config, "region_sweep: no r values");

  std::vector<int> counts(r_values.size());
  detail::parallel_for(r_values.size(), [&](std::size_t i) {
    const auto rates = region_rates(events, split(weights, r_values[i]));
    counts[i] = static_cast<int>(std::count_if(rates.begin(), rates.end(), [&](double v) { return v > phi; }));
  });

  SweepResult out;
  out.phi = phi;
  for (std::size_t i = 0; i < r_values.size(); ++i) out.table[r_values[i]] = counts[i];
  int best = -1;
  for (const auto& [r, c] : out.table) {  // ascending r, so ties keep the smallest
    if (c > best) {
      best = c;
      out.r_u = r;
    }
  }
  return out;
}

PopulationWeights parse_weights(std::istream& in) {
  std::vector<WeightedPoint> pts;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const char delim = line.find('\t') != std::string::npos && line.find(',') == std::string::npos ? '\t' : ',';
    const auto f = split_delimited(line, delim);
    double v[3];
    bool ok = f.size() >= 3;
    for (int k = 0; ok && k < 3; ++k) {
      std::string_view s = f[static_cast<std::size_t>(k)];
      while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
      while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
      const auto res = std::from_chars(s.data(), s.data() + s.size(), v[k]);
      ok = res.ec == std::errc() && res.ptr == s.data() + s.size();
    }
    if (!ok) {
      if (line_no == 1 && pts.empty()) continue;  // header
      fail(ErrorKind::Input, "weights: malformed row at line " + std::to_string(line_no));
    }
    pts.push_back({v[0], v[1], v[2]});
  }
  return PopulationWeights::from_points(std::move(pts));
}

PopulationWeights load_weights(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Input, "cannot read weights file '" + path + "'");
  return parse_weights(in);
}

std::string partition_to_json(const Partition& partition) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& r : partition.regions) {
    nlohmann::ordered_json j;
    j["region_id"] = r.id;
    j["lat_min"] = r.bounds.lat_min;
    j["lat_max"] = r.bounds.lat_max;
    j["lon_min"] = r.bounds.lon_min;
    j["lon_max"] = r.bounds.lon_max;
    j["population"] = r.population;
    arr.push_back(j);
  }
  return arr.dump(2);
}

Partition partition_from_json(const std::string& text) {
  Partition p;
  try {
    for (const auto& j : nlohmann::json::parse(text)) {
      Region r;
      r.id = j.at("region_id").get<int>();
      r.bounds = {j.at("lat_min").get<double>(), j.at("lat_max").get<double>(), j.at("lon_min").get<double>(),
                  j.at("lon_max").get<double>()};
      r.population = j.at("population").get<double>();
      p.regions.push_back(r);
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Input, std::string("partition json: ") + e.what());
  }
  std::sort(p.regions.begin(), p.regions.end(), [](const Region& a, const Region& b) { return a.id < b.id; });
  return p;
}

}  // namespace crimewave

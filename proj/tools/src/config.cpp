#include <fstream>
#include <set>
#include <sstream>

#include "crimewave/error.hpp"
#include "crimewave_cli/cli.hpp"

namespace crimewave::cli {

namespace {

using json = nlohmann::json;

[[noreturn]] void config_error(const std::string& msg) { fail(ErrorKind::Config, "config: " + msg); }

template <typename T>
T get(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    config_error(std::string("field '") + key + "' has the wrong type");
  }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

std::filesystem::path require_file(const json& j, const char* key, const std::filesystem::path& base) {
  if (!j.contains(key)) config_error(std::string("missing required field '") + key + "'");
  const auto path = resolve(base, get<std::string>(j, key, ""));
  if (!std::filesystem::is_regular_file(path))
    config_error(std::string("field '") + key + "': no such file '" + path.string() + "'");
  return path;
}

const std::set<std::string> kKnownKeys{
    "events",  "weights", "format",        "categories",    "week_epoch",  "s0",
    "dj",      "p_level", "bands",         "phi",           "r_values",    "r",
    "seed",    "method",  "mc_replicates", "alpha_step",    "coi_policy",  "coi_mask_global",
    "include_truncated",  "min_samples",   "out"};

}  // namespace

RunConfig parse_run_config(const std::string& text, const std::filesystem::path& base_dir, Command command,
                           const Overrides& overrides) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    config_error(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) config_error("top level must be an object");
  for (const auto& [key, _] : j.items()) {
    if (!kKnownKeys.contains(key)) config_error("unknown field '" + key + "'");
  }

  RunConfig cfg;
  const bool needs_events = command != Command::Partition || j.contains("events");
  if (needs_events) cfg.events = require_file(j, "events", base_dir);
  if (command == Command::Analyze || command == Command::Partition)
    cfg.weights = require_file(j, "weights", base_dir);

  if (j.contains("format")) {
    const auto& f = j.at("format");
    if (!f.is_object()) config_error("field 'format' must be an object");
    cfg.format.timestamp_column = get(f, "timestamp_column", cfg.format.timestamp_column);
    cfg.format.lat_column = get(f, "lat_column", cfg.format.lat_column);
    cfg.format.lon_column = get(f, "lon_column", cfg.format.lon_column);
    cfg.format.category_column = get(f, "category_column", cfg.format.category_column);
    cfg.format.timestamp_format = get(f, "timestamp_format", cfg.format.timestamp_format);
    const auto delim = get<std::string>(f, "delimiter", "");
    if (delim == "\\t" || delim == "\t") {
      cfg.format.delimiter = '\t';
    } else if (delim.size() == 1) {
      cfg.format.delimiter = delim[0];
    } else if (!delim.empty()) {
      config_error("field 'format.delimiter' must be one character");
    }
  }
  for (const auto& c : get(j, "categories", std::vector<std::string>{})) cfg.format.categories.insert(c);

  if (j.contains("week_epoch") && !j.at("week_epoch").is_null()) {
    const auto d = parse_day(get<std::string>(j, "week_epoch", ""), "%Y-%m-%d");
    if (!d) config_error("field 'week_epoch' must be YYYY-MM-DD");
    cfg.week_epoch = monday_of(*d);
  }

  auto& a = cfg.analysis;
  a.s0 = get(j, "s0", a.s0);
  a.dj = get(j, "dj", a.dj);
  a.p_level = get(j, "p_level", a.p_level);
  if (!(a.p_level > 0.0 && a.p_level < 1.0)) config_error("field 'p_level' must be in (0, 1)");
  if (j.contains("bands")) {
    a.bands.clear();
    for (const auto& b : get(j, "bands", std::vector<std::vector<double>>{})) {
      if (b.size() != 2 || !(b[0] > 0.0) || !(b[0] < b[1])) config_error("each band must be [lo_years, hi_years], lo < hi");
      a.bands.push_back({b[0], b[1]});
    }
    if (a.bands.empty()) config_error("field 'bands' is empty");
  }
  a.seed = get<std::uint64_t>(j, "seed", a.seed);
  if (overrides.seed) a.seed = *overrides.seed;
  try {
    a.method = parse_method(get<std::string>(j, "method", "both"));
  } catch (const Error& e) {
    config_error(e.what());
  }
  a.mc_replicates = get<std::size_t>(j, "mc_replicates", a.mc_replicates);
  if (a.mc_replicates < 20) config_error("field 'mc_replicates' must be >= 20");
  a.alpha_step = get(j, "alpha_step", a.alpha_step);
  if (!(a.alpha_step > 0.0 && a.alpha_step <= 0.1)) config_error("field 'alpha_step' must be in (0, 0.1]");
  a.coi_mask_global = get(j, "coi_mask_global", a.coi_mask_global);

  cfg.phi = get(j, "phi", cfg.phi);
  if (!(cfg.phi > 0.0)) config_error("field 'phi' must be > 0");
  cfg.r_values = get(j, "r_values", cfg.r_values);
  if (cfg.r_values.empty()) config_error("field 'r_values' is empty");
  for (int r : cfg.r_values) {
    if (r < 1 || (r & (r - 1)) != 0) config_error("field 'r_values' must hold powers of two");
  }
  if (j.contains("r") && !j.at("r").is_null()) {
    const int r = get(j, "r", 1);
    if (r < 1 || (r & (r - 1)) != 0) config_error("field 'r' must be a power of two");
    cfg.r = r;
  }

  const auto policy = get<std::string>(j, "coi_policy", "exclude");
  if (policy == "exclude") {
    cfg.coi_policy = CoiPolicy::Exclude;
  } else if (policy == "insignificant") {
    cfg.coi_policy = CoiPolicy::CountAsInsignificant;
  } else {
    config_error("field 'coi_policy' must be 'exclude' or 'insignificant'");
  }
  cfg.survey.include_truncated = get(j, "include_truncated", cfg.survey.include_truncated);
  cfg.survey.fit.min_samples = get<std::size_t>(j, "min_samples", cfg.survey.fit.min_samples);

  if (overrides.out) {
    cfg.out = *overrides.out;
  } else if (j.contains("out")) {
    cfg.out = resolve(base_dir, get<std::string>(j, "out", ""));
  } else {
    config_error("missing output directory: set 'out' or pass --out");
  }

  // Canonical record of every effective setting (paths as given, not resolved).
  auto& r = cfg.resolved;
  r["command"] = command == Command::Analyze ? "analyze" : command == Command::CityLevel ? "citylevel" : "partition";
  r["events"] = j.value("events", "");
  r["weights"] = j.value("weights", "");
  r["format"] = {{"timestamp_column", cfg.format.timestamp_column},
                 {"lat_column", cfg.format.lat_column},
                 {"lon_column", cfg.format.lon_column},
                 {"category_column", cfg.format.category_column},
                 {"timestamp_format", cfg.format.timestamp_format},
                 {"delimiter", std::string(cfg.format.delimiter ? 1 : 0, cfg.format.delimiter)}};
  r["categories"] = std::vector<std::string>(cfg.format.categories.begin(), cfg.format.categories.end());
  r["week_epoch"] = cfg.week_epoch ? nlohmann::ordered_json(format_day(*cfg.week_epoch)) : nlohmann::ordered_json(nullptr);
  r["s0"] = a.s0;
  r["dj"] = a.dj;
  r["p_level"] = a.p_level;
  auto bands = nlohmann::ordered_json::array();
  for (const auto& b : a.bands) bands.push_back({b.lo_years, b.hi_years});
  r["bands"] = bands;
  r["phi"] = cfg.phi;
  r["r_values"] = cfg.r_values;
  r["r"] = cfg.r ? nlohmann::ordered_json(*cfg.r) : nlohmann::ordered_json(nullptr);
  r["seed"] = a.seed;
  r["method"] = to_string(a.method);
  r["mc_replicates"] = a.mc_replicates;
  r["alpha_step"] = a.alpha_step;
  r["coi_policy"] = policy;
  r["coi_mask_global"] = a.coi_mask_global;
  r["include_truncated"] = cfg.survey.include_truncated;
  r["min_samples"] = cfg.survey.fit.min_samples;
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path, Command command, const Overrides& overrides) {
  std::ifstream in(path, std::ios::binary);
  if (!in) config_error("cannot read config file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str(), path.parent_path(), command, overrides);
}

}  // namespace crimewave::cli

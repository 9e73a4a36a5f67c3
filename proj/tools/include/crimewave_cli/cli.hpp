#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "crimewave/compose.hpp"
#include "crimewave/ingest.hpp"
#include "crimewave/pipeline.hpp"
#include "crimewave/waves.hpp"

namespace crimewave::cli {

/// Settings for analyze, citylevel and partition. Relative paths resolve
/// against the config file's directory.
struct RunConfig {
  std::filesystem::path events;
  std::filesystem::path weights;
  FormatConfig format;
  std::optional<Day> week_epoch;
  AnalysisOptions analysis;
  double phi = 1.0;
  std::vector<int> r_values{1, 2, 4, 8, 16, 32, 64};
  std::optional<int> r;  // skips the sweep
  CoiPolicy coi_policy = CoiPolicy::Exclude;
  SurveyOptions survey;
  std::filesystem::path out;
  nlohmann::ordered_json resolved;  // canonical form hashed into the manifest
};

enum class Command { Synth, Analyze, CityLevel, Partition };

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> out;
};

RunConfig parse_run_config(const std::string& text, const std::filesystem::path& base_dir,
                           Command command, const Overrides& overrides = {});
RunConfig load_run_config(const std::filesystem::path& path, Command command,
                          const Overrides& overrides = {});

std::string band_tag(const Band& band);
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t v);

struct Summary {
  std::filesystem::path out;
  std::vector<std::string> files;  // relative to out, sorted
  nlohmann::ordered_json info;
};

Summary cmd_analyze(const RunConfig& cfg);
Summary cmd_citylevel(const RunConfig& cfg);
Summary cmd_partition(const RunConfig& cfg);
/// Config is a synth JSON document with an optional "out".
Summary cmd_synth(const std::filesystem::path& config_path, const Overrides& overrides);

/// Parses argv and dispatches. Returns 0 ok, 1 analysis/input error, 2 config error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace crimewave::cli

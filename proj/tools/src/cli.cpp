#include <fstream>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "artifacts.hpp"
#include "crimewave/error.hpp"
#include "crimewave/version.hpp"
#include "crimewave_cli/cli.hpp"

namespace crimewave::cli {

namespace fs = std::filesystem;

namespace {

std::string kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Input: return "input";
    case ErrorKind::Config: return "config";
    case ErrorKind::Analysis: return "analysis";
  }
  return "unknown";
}

int exit_code(ErrorKind kind) { return kind == ErrorKind::Config ? 2 : 1; }

/// Best effort at finding the output directory for error.json.
std::optional<fs::path> guess_out(const fs::path& config, const Overrides& o) {
  if (o.out) return *o.out;
  try {
    std::ifstream in(config);
    if (!in) return {};
    const auto j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_object() && j.contains("out") && j.at("out").is_string()) {
      const fs::path p = j.at("out").get<std::string>();
      return p.is_absolute() ? p : config.parent_path() / p;
    }
  } catch (...) {
  }
  return {};
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Wavelet analysis of periodic waves in weekly crime counts", "crimewave"};
  app.require_subcommand(1);
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "Suppress progress logging");
  app.set_version_flag("--version", [] {
    std::string text = "crimewave " + version();
    for (const auto& [name, v] : dependency_versions()) text += "\n  " + name + " " + v;
    return text;
  });

  std::string config;
  std::string out_dir;
  std::uint64_t seed = 0;
  struct Sub {
    Command command;
    CLI::App* app;
  };
  std::vector<Sub> subs;
  const std::pair<Command, const char*> names[] = {
      {Command::Synth, "synth"},
      {Command::Analyze, "analyze"},
      {Command::CityLevel, "citylevel"},
      {Command::Partition, "partition"},
  };
  const char* help[] = {
      "Generate synthetic series or event streams with planted waves",
      "Partition, analyze every region and compose the results",
      "Analyze the city-wide aggregate series",
      "Build the population-balanced partition",
  };
  for (std::size_t i = 0; i < 4; ++i) {
    auto* sub = app.add_subcommand(names[i].second, help[i]);
    sub->add_option("-c,--config", config, "JSON configuration file")->required();
    sub->add_option("-o,--out", out_dir, "Output directory (overrides the config)");
    sub->add_option("--seed", seed, "Random seed (overrides the config)");
    subs.push_back({names[i].first, sub});
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion& e) {
    out << e.what() << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  auto logger = spdlog::stderr_color_mt("crimewave");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(quiet ? spdlog::level::off : spdlog::level::info);

  Command command = Command::Synth;
  for (const auto& s : subs) {
    if (s.app->parsed()) command = s.command;
  }
  Overrides overrides;
  for (const auto& s : subs) {
    if (!s.app->parsed()) continue;
    if (s.app->count("--seed")) overrides.seed = seed;
    if (s.app->count("--out")) overrides.out = fs::path(out_dir);
  }
  const fs::path config_path(config);

  int code = 0;
  try {
    Summary summary;
    if (command == Command::Synth) {
      summary = cmd_synth(config_path, overrides);
    } else {
      const auto cfg = load_run_config(config_path, command, overrides);
      switch (command) {
        case Command::Analyze: summary = cmd_analyze(cfg); break;
        case Command::CityLevel: summary = cmd_citylevel(cfg); break;
        default: summary = cmd_partition(cfg); break;
      }
    }
    spdlog::info("wrote {} files to {}", summary.files.size(), summary.out.string());
    out << summary.info.dump(2) << "\n";
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    code = exit_code(e.kind());
    if (auto o = guess_out(config_path, overrides)) {
      try {
        write_error(*o, kind_name(e.kind()), e.what());
      } catch (...) {
      }
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    code = 1;
  }
  spdlog::drop("crimewave");
  return code;
}

}  // namespace crimewave::cli

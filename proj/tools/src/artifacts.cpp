#include "artifacts.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "crimewave/error.hpp"
#include "crimewave/version.hpp"
#include "crimewave_cli/cli.hpp"

namespace crimewave::cli {

namespace fs = std::filesystem;

namespace {

constexpr const char* kStaging = ".staging";

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Input, "cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
  if (!out) fail(ErrorKind::Input, "cannot write '" + path.string() + "'");
}

// Removes the artifacts a previous run listed in its manifest, plus error.json.
void clear_previous(const fs::path& out) {
  fs::remove(out / "error.json");
  const auto manifest = out / "manifest.json";
  if (!fs::exists(manifest)) return;
  try {
    const auto j = nlohmann::json::parse(read_file(manifest));
    for (const auto& f : j.at("files")) fs::remove(out / f.at("name").get<std::string>());
  } catch (const nlohmann::json::exception&) {
  }
  fs::remove(manifest);
  if (fs::is_directory(out / "series") && fs::is_empty(out / "series")) fs::remove(out / "series");
}

}  // namespace

Artifacts::Artifacts(fs::path out) : out_(std::move(out)), staging_(out_ / kStaging) {
  std::error_code ec;
  fs::remove_all(staging_, ec);
  fs::create_directories(staging_, ec);
  if (ec) fail(ErrorKind::Config, "cannot create output directory '" + out_.string() + "': " + ec.message());
}

Artifacts::~Artifacts() {
  std::error_code ec;
  fs::remove_all(staging_, ec);
}

void Artifacts::write(const std::string& name, const std::string& content) {
  write_file(staging_ / name, content);
  files_.push_back(name);
}

void Artifacts::add_input(const std::string& role, const fs::path& path) {
  const auto bytes = read_file(path);
  inputs_[role] = {{"bytes", bytes.size()}, {"fnv1a", hex64(fnv1a(bytes))}};
}

std::vector<std::string> Artifacts::commit(const std::string& command, const nlohmann::ordered_json& config) {
  std::sort(files_.begin(), files_.end());
  nlohmann::ordered_json m;
  m["tool"] = "crimewave";
  m["version"] = version();
  nlohmann::ordered_json deps;
  for (const auto& [name, v] : dependency_versions()) deps[name] = v;
  m["dependencies"] = deps;
  m["command"] = command;
  m["config_hash"] = hex64(fnv1a(config.dump()));
  m["config"] = config;
  m["inputs"] = inputs_;
  auto files = nlohmann::ordered_json::array();
  for (const auto& f : files_) {
    const auto bytes = read_file(staging_ / f);
    files.push_back({{"name", f}, {"bytes", bytes.size()}, {"fnv1a", hex64(fnv1a(bytes))}});
  }
  m["files"] = files;
  write_file(staging_ / "manifest.json", m.dump(2) + "\n");

  clear_previous(out_);
  for (const auto& f : files_) {
    fs::create_directories((out_ / f).parent_path());
    fs::rename(staging_ / f, out_ / f);
  }
  fs::rename(staging_ / "manifest.json", out_ / "manifest.json");
  auto names = files_;
  names.push_back("manifest.json");
  std::sort(names.begin(), names.end());
  return names;
}

void write_error(const fs::path& out, const std::string& kind, const std::string& message) {
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) return;
  fs::remove_all(out / kStaging, ec);
  clear_previous(out);
  nlohmann::ordered_json j;
  j["error"] = {{"kind", kind}, {"message", message}};
  std::ofstream f(out / "error.json", std::ios::binary | std::ios::trunc);
  f << j.dump(2) << "\n";
}

}  // namespace crimewave::cli

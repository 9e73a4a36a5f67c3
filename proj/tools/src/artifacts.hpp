#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace crimewave::cli {

/// Writes outputs into a staging directory inside `out`; commit() moves them
/// into place together with manifest.json, so a failed run leaves no partial
/// artifacts behind.
class Artifacts {
 public:
  explicit Artifacts(std::filesystem::path out);
  ~Artifacts();
  Artifacts(const Artifacts&) = delete;
  Artifacts& operator=(const Artifacts&) = delete;

  void write(const std::string& name, const std::string& content);
  void add_input(const std::string& role, const std::filesystem::path& path);

  /// Writes manifest.json and moves everything into `out`. Returns the sorted
  /// relative names of the committed files (manifest included).
  std::vector<std::string> commit(const std::string& command, const nlohmann::ordered_json& config);

  const std::filesystem::path& out() const { return out_; }

 private:
  std::filesystem::path out_;
  std::filesystem::path staging_;
  std::vector<std::string> files_;
  nlohmann::ordered_json inputs_ = nlohmann::ordered_json::object();
};

/// Replaces any previous artifacts in `out` with a single error.json.
void write_error(const std::filesystem::path& out, const std::string& kind, const std::string& message);

}  // namespace crimewave::cli

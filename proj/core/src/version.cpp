#include "crimewave/version.hpp"

#include <boost/version.hpp>
#include <fftw3.h>
#include <nlohmann/json.hpp>

namespace crimewave {

std::string version() { return CRIMEWAVE_VERSION; }

std::vector<std::pair<std::string, std::string>> dependency_versions() {
  const std::string json = std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                           std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                           std::to_string(NLOHMANN_JSON_VERSION_PATCH);
  return {{"fftw", fftw_version}, {"boost", BOOST_LIB_VERSION}, {"nlohmann_json", json}};
}

}  // namespace crimewave

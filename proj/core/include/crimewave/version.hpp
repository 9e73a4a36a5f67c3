#pragma once

#include <string>
#include <utility>
#include <vector>

namespace crimewave {

std::string version();

/// (name, version) of the numerical and serialization libraries linked in.
std::vector<std::pair<std::string, std::string>> dependency_versions();

}  // namespace crimewave

#include "crimewave/csv.hpp"

#include <charconv>
#include <cmath>

#include "crimewave/error.hpp"

namespace crimewave {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::vector<std::string> split_delimited(std::string_view line, char delim) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == delim) {
      fields.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

CsvTable::CsvTable(std::initializer_list<std::string_view> header) : width_(header.size()) {
  bool first = true;
  for (auto h : header) {
    if (!first) text_ += ',';
    text_ += h;
    first = false;
  }
  text_ += '\n';
}

CsvTable& CsvTable::row(std::initializer_list<std::string> cells) {
  if (cells.size() != width_) fail(ErrorKind::Analysis, "CsvTable: row width mismatch");
  bool first = true;
  for (const auto& c : cells) {
    if (!first) text_ += ',';
    text_ += c;
    first = false;
  }
  text_ += '\n';
  return *this;
}

}  // namespace crimewave

#pragma once

#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

namespace crimewave {

/// Shortest round-trip decimal form; "nan" for NaN.
std::string format_double(double v);

/// Splits one delimited line, honouring double-quoted fields ("" escapes).
std::vector<std::string> split_delimited(std::string_view line, char delim);

/// Accumulates rows of a comma-separated table with a fixed header.
class CsvTable {
 public:
  explicit CsvTable(std::initializer_list<std::string_view> header);

  CsvTable& row(std::initializer_list<std::string> cells);
  const std::string& str() const { return text_; }

 private:
  std::size_t width_;
  std::string text_;
};

}  // namespace crimewave

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace feaslab {

/// Shortest round-trip decimal rendering (deterministic across runs).
std::string format_double(double v);
std::string format_field(const std::optional<double>& v);  // empty cell for nullopt

/// Deterministic CSV assembly: fixed column set, rows appended in order,
/// '\n' line endings.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> columns);

  void add_row(std::vector<std::string> cells);
  const std::vector<std::string>& columns() const { return columns_; }
  std::string to_string() const;
  void write_file(const std::string& path) const;

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace feaslab

#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace thermo {

/// Writes through a sibling temporary file and renames it into place, so a
/// reader never sees a partially written file.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);
std::string read_file(const std::filesystem::path& path);

/// Shortest text that reads back to the same double.
std::string fmt_exact(double x);

/// Plain comma-separated table without quoting; fields never contain commas.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(std::string_view name) const;  // throws when absent
  double number(std::size_t row, std::string_view name) const;
};

CsvTable parse_csv(std::string_view text);

}  // namespace thermo

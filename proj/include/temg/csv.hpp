#pragma once

#include <string>
#include <vector>

namespace temg {

// Minimal CSV support: comma-separated, no quoting (addresses and numbers
// never contain commas in the formats this tool reads and writes). Handles
// CRLF line endings and skips a trailing empty line.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Column position for `name`, or -1.
  int column(const std::string& name) const;
};

CsvTable read_csv(const std::string& path);

// Strict numeric parsing: the whole field must be consumed.
// On failure these throw IoError mentioning `context` (e.g. "row 7, column time").
int64_t parse_i64(const std::string& field, const std::string& context);
double parse_f64(const std::string& field, const std::string& context);

}  // namespace temg

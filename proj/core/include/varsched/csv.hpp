#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace varsched::csv {

// Minimal comma-separated reader for the plain (unquoted) tables this project
// reads and writes. Blank lines and lines starting with '#' are skipped.
struct Row {
  std::size_t line = 0;  // 1-based line number in the source file
  std::vector<std::string> fields;
};

struct Table {
  std::vector<std::string> header;
  std::vector<Row> rows;

  // Column index by name; throws LoadError naming `source` if absent.
  std::size_t column(std::string_view name, std::string_view source) const;
  bool has_column(std::string_view name) const;
};

Table read_file(const std::filesystem::path& path);
Table parse(std::string_view text, std::string_view source);

std::vector<std::string> split(std::string_view line, char sep = ',');
std::string_view trim(std::string_view s);

// Strict numeric parsing; throws LoadError with "source:line: column" context.
double to_double(std::string_view text, std::string_view source, std::size_t line,
                 std::string_view column);
long long to_int(std::string_view text, std::string_view source, std::size_t line,
                 std::string_view column);

// Writes `contents` to a sibling temporary file and renames it into place.
void write_atomically(const std::filesystem::path& path, std::string_view contents);

}  // namespace varsched::csv

#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace hidsq {

// Minimal RFC 4180 reader for the files this library writes. Leading lines
// starting with '#' are kept in `comments`; the next line is the header.
struct CsvTable {
  std::vector<std::string> comments;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Throws ValidationError if the column is missing.
  std::size_t column(std::string_view name) const;
  const std::string& at(std::size_t row, std::string_view name) const { return rows.at(row).at(column(name)); }
  double number(std::size_t row, std::string_view name) const;
};

CsvTable parse_csv(std::string_view text, std::string_view source = "<csv>");
CsvTable read_csv(const std::filesystem::path& path);

}  // namespace hidsq

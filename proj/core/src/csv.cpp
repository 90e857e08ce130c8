#include "hidsq/csv.hpp"

#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

#include "hidsq/error.hpp"

namespace hidsq {

std::size_t CsvTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw ValidationError("csv: missing column '" + std::string(name) + "'");
}

double CsvTable::number(std::size_t row, std::string_view name) const {
  const std::string& s = at(row, name);
  if (s == "inf") return std::numeric_limits<double>::infinity();
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) {
    throw ValidationError("csv: column '" + std::string(name) + "' row " + std::to_string(row + 1) +
                          ": not a number: '" + s + "'");
  }
  return v;
}

CsvTable parse_csv(std::string_view text, std::string_view source) {
  CsvTable t;
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false, any = false;
  std::size_t line = 1;
  bool at_line_start = true;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (at_line_start && !quoted && records.empty() && t.header.empty() && c == '#') {
      const auto eol = text.find('\n', i);
      t.comments.emplace_back(text.substr(i, eol == std::string_view::npos ? std::string_view::npos : eol - i));
      if (eol == std::string_view::npos) break;
      i = eol;
      ++line;
      continue;
    }
    at_line_start = false;
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line;
        field += c;
      }
      continue;
    }
    switch (c) {
      case '"':
        quoted = true;
        any = true;
        break;
      case ',':
        fields.push_back(std::move(field));
        field.clear();
        any = true;
        break;
      case '\r':
        break;
      case '\n':
        if (any || !field.empty()) {
          fields.push_back(std::move(field));
          records.push_back(std::move(fields));
        }
        field.clear();
        fields.clear();
        any = false;
        at_line_start = true;
        ++line;
        break;
      default:
        field += c;
        any = true;
    }
  }
  if (quoted) throw ParseError(std::string(source), line, "unterminated quoted field");
  if (any || !field.empty()) {
    fields.push_back(std::move(field));
    records.push_back(std::move(fields));
  }
  if (records.empty()) return t;
  t.header = std::move(records.front());
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != t.header.size()) {
      throw ParseError(std::string(source), r + 1 + t.comments.size(),
                       "expected " + std::to_string(t.header.size()) + " fields, got " +
                           std::to_string(records[r].size()));
    }
    t.rows.push_back(std::move(records[r]));
  }
  return t;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string(), "cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str(), path.string());
}

}  // namespace hidsq

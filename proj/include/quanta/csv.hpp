#pragma once

// Minimal CSV reading/writing for the tool's table formats: comma separated,
// mandatory header row, optional double quotes around fields.

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "quanta/error.hpp"

namespace quanta::csv {

struct Row {
  std::size_t line = 0; ///< 1-based line number in the file
  std::vector<std::string> fields;
};

struct Table {
  std::vector<std::string> header;
  std::vector<Row> rows;

  /// Column index by exact name, or -1.
  int column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<int>(i);
    return -1;
  }
};

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_line(std::string_view line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(trim(cur));
  return out;
}

inline Table read(std::istream& in, const std::string& source = "input") {
  Table t;
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty() || line.front() == '#') continue;
    auto fields = split_line(line);
    if (!have_header) {
      t.header = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != t.header.size())
      throw InputError(source + ": row at line " + std::to_string(lineno) + " has " + std::to_string(fields.size()) +
                       " fields, expected " + std::to_string(t.header.size()));
    t.rows.push_back({lineno, std::move(fields)});
  }
  if (!have_header) throw ValidationError(source + ": file is empty (a header row is required)");
  return t;
}

inline Table read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  return read(in, path);
}

/// Parses a finite double or throws naming the row.
inline double parse_number(const std::string& field, std::size_t line, const std::string& source) {
  double v = 0.0;
  const char* b = field.data();
  const char* e = b + field.size();
  if (!field.empty() && *b == '+') ++b;
  auto [ptr, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || ptr != e || !std::isfinite(v))
    throw InputError(source + ": line " + std::to_string(line) + ": '" + field + "' is not a number");
  return v;
}

/// Shortest round-trippable representation, fixed across platforms.
inline std::string format(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

inline std::string escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out.push_back('"');
  return out;
}

} // namespace quanta::csv

#pragma once

#include <cstdint>
#include <istream>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "emergelab/error.hpp"

namespace emergelab::csv {

inline std::string quote(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

inline void write_row(std::ostream& os, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) os << ',';
    os << quote(fields[i]);
  }
  os << '\n';
}

// Splits one RFC 4180 record. Quoted fields may not span lines.
inline std::vector<std::string> split_row(const std::string& line, std::int64_t line_no = 0) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') cur += '"', ++i;
        else quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  if (quoted) throw Error(ErrorKind::MalformedLine, "unterminated quote", line_no);
  out.push_back(std::move(cur));
  return out;
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::ptrdiff_t column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<std::ptrdiff_t>(i);
    return -1;
  }
};

inline Table read(std::istream& is) {
  Table t;
  std::string line;
  std::int64_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    auto fields = split_row(line, line_no);
    if (t.header.empty()) {
      t.header = std::move(fields);
      continue;
    }
    if (fields.size() != t.header.size())
      throw Error(ErrorKind::MalformedLine,
                  "expected " + std::to_string(t.header.size()) + " fields, got " +
                      std::to_string(fields.size()),
                  line_no);
    t.rows.push_back(std::move(fields));
  }
  return t;
}

inline double parse_double(const std::string& s, std::int64_t line_no = 0) {
  if (s == "NA" || s.empty()) return std::numeric_limits<double>::quiet_NaN();
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorKind::MalformedLine, "not a number: " + s, line_no);
  }
}

}  // namespace emergelab::csv

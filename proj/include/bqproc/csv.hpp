#pragma once

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "bqproc/error.hpp"

namespace bqproc::csv {

/// Shortest decimal text that round-trips to the same double.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split(std::string_view line, char sep = ',') {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      break;
    }
    out.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
  return out;
}

/// Parses a finite decimal real; NaN, Inf and trailing garbage are rejected.
inline double parse_finite(std::string_view field, std::size_t line, std::string_view column) {
  double v = 0.0;
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  auto res = std::from_chars(field.data(), field.data() + field.size(), v);
  if (res.ec != std::errc() || res.ptr != field.data() + field.size()) {
    throw ParseError(line, "column '" + std::string(column) + "': cannot parse '" +
                               std::string(field) + "' as a real number");
  }
  if (!std::isfinite(v)) {
    throw ParseError(line, "column '" + std::string(column) + "': non-finite value");
  }
  return v;
}

/// Reads the next non-blank line, tracking 1-based line numbers.
inline bool next_line(std::istream& in, std::string& line, std::size_t& lineno) {
  while (std::getline(in, line)) {
    ++lineno;
    if (!trim(line).empty()) return true;
  }
  return false;
}

/// Comma-separated join of doubles in round-trip form.
inline std::string join(const std::vector<double>& vals, char sep = ',') {
  std::string out;
  for (std::size_t i = 0; i < vals.size(); ++i) {
    if (i) out += sep;
    out += format_double(vals[i]);
  }
  return out;
}

inline std::vector<double> parse_list(std::string_view text, std::string_view what) {
  std::vector<double> out;
  for (auto f : split(text)) {
    if (f.empty()) continue;
    out.push_back(parse_finite(f, 0, what));
  }
  return out;
}

}  // namespace bqproc::csv

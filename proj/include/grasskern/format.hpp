#pragma once

#include <charconv>
#include <cstdio>
#include <string>
#include <string_view>
#include <vector>

#include "grasskern/error.hpp"

namespace grasskern {

/// Shortest text that parses back to exactly `v`.
inline std::string format_shortest(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

/// Fixed 17 significant digits (the dataset and CSV convention).
inline std::string format_17(double v) {
  char buf[64];
  const int n = std::snprintf(buf, sizeof buf, "%.17g", v);
  return std::string(buf, static_cast<std::size_t>(n));
}

/// Strict full-string double parse.
inline bool parse_double(std::string_view s, double& out) {
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc{} && res.ptr == s.data() + s.size();
}

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

struct Record {
  std::string key;
  std::string value;
  int line;
};

/// `key = value` lines; blank lines and lines starting with '#' are skipped.
inline std::vector<Record> parse_records(std::string_view text, std::string_view what) {
  std::vector<Record> out;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto end = text.find('\n', pos);
    const auto raw = text.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos);
    pos = end == std::string_view::npos ? text.size() + 1 : end + 1;
    ++line_no;
    const auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ParseError(std::string(what) + " line " + std::to_string(line_no) + ": expected 'key = value'");
    out.push_back({std::string(trim(line.substr(0, eq))), std::string(trim(line.substr(eq + 1))), line_no});
  }
  return out;
}

/// Whitespace-separated doubles.
inline std::vector<double> parse_numbers(std::string_view s, std::string_view what) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos < s.size()) {
    const auto b = s.find_first_not_of(" \t", pos);
    if (b == std::string_view::npos) break;
    const auto e = s.find_first_of(" \t", b);
    const auto tok = s.substr(b, e == std::string_view::npos ? std::string_view::npos : e - b);
    double v = 0.0;
    if (!parse_double(tok, v)) throw ParseError(std::string(what) + ": bad number '" + std::string(tok) + "'");
    out.push_back(v);
    pos = e == std::string_view::npos ? s.size() : e;
  }
  return out;
}

inline long long parse_integer(std::string_view s, std::string_view what) {
  long long v = 0;
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw ParseError(std::string(what) + ": bad integer '" + std::string(s) + "'");
  return v;
}

inline std::string join_17(const double* values, std::size_t n) {
  std::string out;
  for (std::size_t i = 0; i < n; ++i) {
    if (i) out.push_back(' ');
    out += format_17(values[i]);
  }
  return out;
}

}  // namespace grasskern

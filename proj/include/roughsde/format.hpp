#pragma once

#include <charconv>
#include <cmath>
#include <string>
#include <system_error>

namespace roughsde {

// Locale-independent decimal with 17 significant digits.
inline std::string format_full(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

// Shortest decimal that round-trips.
inline std::string format_short(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& text) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = first + text.size();
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last) throw std::invalid_argument("not a number: " + text);
  return v;
}

}  // namespace roughsde

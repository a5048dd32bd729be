#pragma once

#include <charconv>
#include <cstdio>
#include <string>
#include <string_view>
#include <system_error>

// Deterministic number formatting for reports and CSV output.  All floating
// point values are rendered with std::to_chars shortest round-trip form, so
// re-running a command yields byte-identical files.

namespace resodrive {

inline std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) return "nan";
  return std::string(buf, ptr);
}

// Fixed-precision variant for human-facing tables (still deterministic).
inline std::string format_fixed(double v, int digits) {
  char buf[80];
  std::snprintf(buf, sizeof(buf), "%.*g", digits, v);
  return std::string(buf);
}

inline void csv_field(std::string& out, std::string_view field, bool first) {
  if (!first) out.push_back(',');
  out.append(field);
}

inline void csv_field(std::string& out, double v, bool first) {
  csv_field(out, format_double(v), first);
}

}  // namespace resodrive

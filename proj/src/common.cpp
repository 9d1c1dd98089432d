#include "actionscore/common.hpp"

#include <cmath>
#include <cstdio>

namespace actionscore {

namespace {

bool is_whitespace_byte(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' ||
         c == '\f';
}

}  // namespace

bool is_valid_sample_id(std::string_view id) {
  if (id.empty() || id.size() > kMaxSampleIdBytes) return false;
  for (char c : id) {
    if (is_whitespace_byte(c)) return false;
  }
  return true;
}

bool is_valid_component_name(std::string_view name) {
  if (name.empty() || name.size() > kMaxComponentNameBytes) return false;
  for (char c : name) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
    if (!ok) return false;
  }
  return name != kTotalComponent;
}

std::string format_double17(double value) {
  // Negative zero must keep a decimal point: "-0" would parse back as the
  // integer 0 and drop the sign bit.
  if (value == 0.0) return std::signbit(value) ? "-0.0" : "0";
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

std::string format_score_1dp(double value) {
  // std::round is half away from zero; plain "%.1f" would round half to even
  // on exactly representable ties such as 0.25.
  const double rounded = std::round(value * 10.0) / 10.0;
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.1f", rounded);
  return buf;
}

}  // namespace actionscore

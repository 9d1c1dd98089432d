#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace actionscore {

// Domain error (bad records, duplicate keys, contract violations).
// The CLI maps these to exit code 1; I/O failures map to exit code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// "total" is derived by the ledger and never written by producers.
inline constexpr std::string_view kTotalComponent = "total";
inline constexpr std::size_t kMaxSampleIdBytes = 256;
inline constexpr std::size_t kMaxComponentNameBytes = 64;

// Non-empty token, no whitespace bytes, at most 256 bytes.
bool is_valid_sample_id(std::string_view id);

// [a-z0-9_]{1,64}, and not the reserved name "total".
bool is_valid_component_name(std::string_view name);

// Decimal text with 17 significant digits: round-trips any finite double
// through strtod bit-exactly.
std::string format_double17(double value);

// Display rounding for captions, one decimal place, half away from zero:
// 1015.903 -> "1015.9", 0.073 -> "0.1", 0.25 -> "0.3".
std::string format_score_1dp(double value);

}  // namespace actionscore

#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace semsum {

// Library errors carry a stable machine-readable code alongside the human
// message so the CLI can serialize them without string matching.
class Error : public std::runtime_error {
public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

private:
  std::string code_;
};

namespace errc {
inline constexpr const char* bad_format = "bad_format";
inline constexpr const char* dim_mismatch = "dim_mismatch";
inline constexpr const char* zero_row = "zero_row";
inline constexpr const char* non_finite = "non_finite";
inline constexpr const char* zero_norm = "zero_norm";
inline constexpr const char* out_of_range = "out_of_range";
inline constexpr const char* total_probability_zero = "total_probability_zero";
inline constexpr const char* infeasible = "infeasible";
inline constexpr const char* empty_input = "empty_input";
inline constexpr const char* too_large = "too_large";
inline constexpr const char* io = "io";
}  // namespace errc

}  // namespace semsum

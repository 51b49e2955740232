#pragma once

#include <stdexcept>
#include <string>

namespace vical {

// Every failure the library reports. Codes are grouped so callers (and the
// C API / CLI) can map them to coarse classes without string matching.
enum class ErrorCode : int {
  ok = 0,

  // usage
  invalid_argument = 10,
  bad_window = 11,

  // data
  io = 100,
  parse = 101,
  monotonicity = 102,
  norm = 103,
  missing_section = 104,
  out_of_range = 105,
  empty_input = 106,
  empty_range = 107,
  insufficient_data = 108,
  no_overlap = 109,
  missing_correspondence = 110,
  unobserved_pixel = 111,
  all_saturated = 112,

  // numerical
  no_signal = 200,
  boundary_minimum = 201,
  degenerate = 202,
  no_convergence = 203,
  singular = 204,

  internal = 500,
};

// 0 = success, 1 = usage, 2 = data, 3 = numerical failure. Used for CLI
// exit codes and exposed through the C API.
constexpr int error_class(ErrorCode c) {
  const int v = static_cast<int>(c);
  if (v == 0) return 0;
  if (v < 100) return 1;
  if (v < 200) return 2;
  if (v < 500) return 3;
  return 3;
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace vical

#pragma once

#include <stdexcept>
#include <string>

namespace mdce {

/// Failure categories shared by the C++ core and the C API status codes.
enum class ErrorCode {
  invalid_argument = 1,
  out_of_range = 2,
  dimension_mismatch = 3,
  singular = 4,
  degenerate_intermediate = 5,
  truncation = 6,
  not_converged = 7,
  search_failed = 8,
  integration_quality = 9,
  not_steady = 10,
  io = 11,
  config = 12,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace mdce

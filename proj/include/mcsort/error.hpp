#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mcsort {

enum class ErrorCode {
  invalid_input,
  not_found,
  state_conflict,
  solver_failure,
  degenerate_model,
  internal,
};

std::string_view to_string(ErrorCode code);

/// Base exception for every failure raised by the library. The service maps
/// the code onto its error envelope and HTTP status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

inline void require(bool condition, const std::string& message) {
  if (!condition) fail(ErrorCode::invalid_input, message);
}

}  // namespace mcsort

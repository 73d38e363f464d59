#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace shapkit {

enum class ErrorCode {
  capacity,
  config,
  shape,
  numeric,
  parse,
  validation,
  singular,
  budget_required,
  invalid_pair,
  io,
};

// Machine-readable identifier, e.g. "config_error".
std::string_view error_code_name(ErrorCode code);

// Process exit status for a failure of this kind: 2 config/validation,
// 3 numeric failure, 4 I/O.
int exit_status(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace shapkit

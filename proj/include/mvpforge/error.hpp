#pragma once

#include <stdexcept>
#include <string>

namespace mvpforge {

enum class ErrorKind {
  schema,      // malformed input line or document
  io,          // missing/unreadable/unwritable file
  validation,  // well-formed input that violates an invariant
  config,      // bad parameter values
  data,        // payload content that cannot be converted
};

// All library failures are reported through this one exception type. `code`
// is a short stable identifier ("empty-structure", "no-eval-examples", ...)
// that callers and tests can match on.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string code, const std::string& message)
      : std::runtime_error(message), kind_(kind), code_(std::move(code)) {}

  ErrorKind kind() const { return kind_; }
  const std::string& code() const { return code_; }

 private:
  ErrorKind kind_;
  std::string code_;
};

}  // namespace mvpforge

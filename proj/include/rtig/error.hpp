#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rtig {

/// Failure categories; each maps to one CLI exit code.
enum class ErrorKind {
  validation,  ///< bad input, exit code 2
  numeric,     ///< numerical failure, exit code 3
  degenerate,  ///< degenerate level (zero variability), exit code 4
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& message)
      : Error(ErrorKind::validation, message) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& message)
      : Error(ErrorKind::numeric, message) {}
};

class DegenerateError : public Error {
 public:
  explicit DegenerateError(const std::string& message)
      : Error(ErrorKind::degenerate, message) {}
};

inline std::string_view error_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::validation: return "validation-error";
    case ErrorKind::numeric: return "numeric-error";
    case ErrorKind::degenerate: return "degenerate-level";
  }
  return "error";
}

inline int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::validation: return 2;
    case ErrorKind::numeric: return 3;
    case ErrorKind::degenerate: return 4;
  }
  return 1;
}

}  // namespace rtig

#pragma once

#include <stdexcept>
#include <string>

namespace branchdepth {

// Error categories double as the CLI exit codes.
enum class ErrorKind { io = 1, validation = 2, numeric = 3 };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }
  int exit_code() const noexcept { return static_cast<int>(kind_); }

 private:
  ErrorKind kind_;
};

/// Unreadable or malformed files.
class IoError : public Error {
 public:
  explicit IoError(const std::string& message) : Error(ErrorKind::io, message) {}
};

/// Bad parameters, mismatched dimensions, violated preconditions.
class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& message)
      : Error(ErrorKind::validation, message) {}
};

/// Numerically undefined results: non-positive disparity, no valid samples,
/// metrics over empty sets.
class NumericError : public Error {
 public:
  explicit NumericError(const std::string& message)
      : Error(ErrorKind::numeric, message) {}
};

}  // namespace branchdepth

#pragma once

#include <stdexcept>
#include <string>

namespace breathflow {

/// Broad failure class, used by the CLI to pick an exit code.
enum class ErrorKind {
  input,              // unreadable, corrupt, or inconsistent input data
  validation,         // a parameter or precondition was violated
  insufficient_signal // the signal chain could not produce a breath rate
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class LoadError : public Error {
 public:
  explicit LoadError(const std::string& message) : Error(ErrorKind::input, message) {}
};

class SequenceError : public Error {
 public:
  explicit SequenceError(const std::string& message) : Error(ErrorKind::input, message) {}
};

class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& message) : Error(ErrorKind::validation, message) {}
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& message) : Error(ErrorKind::validation, message) {}
};

class InsufficientSignalError : public Error {
 public:
  explicit InsufficientSignalError(const std::string& message)
      : Error(ErrorKind::insufficient_signal, message) {}
};

// Throws DimensionError unless (w1, h1) == (w2, h2).
void require_same_size(int w1, int h1, int w2, int h2, const char* what);

}  // namespace breathflow

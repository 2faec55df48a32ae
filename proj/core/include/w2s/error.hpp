#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace w2s {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the operation's domain or a violated precondition.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Unreadable or malformed input; carries the byte offset where parsing stopped.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t byte_offset)
      : Error(message + " (byte offset " + std::to_string(byte_offset) + ")"),
        byte_offset_(byte_offset) {}
  std::size_t byte_offset() const { return byte_offset_; }

 private:
  std::size_t byte_offset_ = 0;
};

/// Filesystem or pipe failure, with path context in the message.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Missing external prerequisite (encoder binary, environment variable).
class EnvironmentError : public Error {
 public:
  using Error::Error;
};

/// Iterative solver stopped before reaching its tolerance.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& message, std::vector<double> last_iterate,
                   double gradient_norm)
      : Error(message),
        last_iterate_(std::move(last_iterate)),
        gradient_norm_(gradient_norm) {}
  const std::vector<double>& last_iterate() const { return last_iterate_; }
  double gradient_norm() const { return gradient_norm_; }

 private:
  std::vector<double> last_iterate_;
  double gradient_norm_ = 0.0;
};

}  // namespace w2s

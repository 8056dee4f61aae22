#pragma once

#include <stdexcept>
#include <string>

namespace edusim {

// Argument outside an operation's domain (non-finite values, bad rates, ...).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Vector length mismatch between a learner and its input.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DivisionByZero : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Malformed input data. `line` is 1-based, 0 when not tied to a line.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Tutoring-session state violations. `code` is machine readable and is what the
// HTTP layer reports; `status` is the matching HTTP status.
class SessionError : public std::runtime_error {
 public:
  SessionError(std::string code, int status, const std::string& what)
      : std::runtime_error(what), code_(std::move(code)), status_(status) {}
  const std::string& code() const noexcept { return code_; }
  int status() const noexcept { return status_; }

 private:
  std::string code_;
  int status_;
};

}  // namespace edusim

#pragma once

#include <stdexcept>
#include <string>

namespace cluesum {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Empty or whitespace-only input where content is required.
class EmptyInput : public Error {
 public:
  using Error::Error;
};

/// File could not be opened or read.
class IoError : public Error {
 public:
  using Error::Error;
};

/// A value is outside its documented domain.
class ValueError : public Error {
 public:
  using Error::Error;
};

/// Bad configuration (unknown key, invalid combination).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Syntactically malformed input line.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& msg)
      : Error("line " + std::to_string(line) + ": " + msg), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Structurally invalid input line (missing or malformed field).
class SchemaError : public Error {
 public:
  SchemaError(std::size_t line, const std::string& msg)
      : Error("line " + std::to_string(line) + ": " + msg), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Non-finite value encountered during numerical work.
class NumericError : public Error {
 public:
  NumericError(const std::string& tensor, const std::string& msg)
      : Error("tensor '" + tensor + "': " + msg), tensor_(tensor) {}
  const std::string& tensor() const { return tensor_; }

 private:
  std::string tensor_;
};

}  // namespace cluesum

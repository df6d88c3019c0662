#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace kbforge {

struct Error : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NormalizationError : public Error {
  using Error::Error;
};

// Syntax errors in .pl documents and malformed LLM payloads. Line/column are
// 1-based; zero means "not applicable".
struct ParseError : public Error {
  std::size_t line = 0;
  std::size_t column = 0;
  std::string raw;

  ParseError(const std::string& message, std::size_t line_, std::size_t column_)
      : Error(line_ ? "line " + std::to_string(line_) + ", column " + std::to_string(column_) + ": " + message
                    : message),
        line(line_),
        column(column_) {}

  static ParseError with_raw(const std::string& message, std::string raw_text) {
    ParseError e(message, 0, 0);
    e.raw = std::move(raw_text);
    return e;
  }
};

struct SchemaError : public Error {
  using Error::Error;
};

struct UnsupportedTermError : public Error {
  std::size_t line = 0;
  UnsupportedTermError(const std::string& message, std::size_t line_)
      : Error("line " + std::to_string(line_) + ": " + message), line(line_) {}
};

struct BackendError : public Error {
  int status = 0;  // HTTP status when one was received, 0 otherwise
  explicit BackendError(const std::string& message, int status_ = 0) : Error(message), status(status_) {}
};

struct QueryError : public Error {
  using Error::Error;
};

struct ValidationError : public Error {
  using Error::Error;
};

struct SamplingError : public Error {
  using Error::Error;
};

struct DegenerateError : public Error {
  using Error::Error;
};

struct IoError : public Error {
  using Error::Error;
};

}  // namespace kbforge

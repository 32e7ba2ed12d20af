#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace drqn {

// Every failure raised by the library derives from Error and carries a stable
// kind name that the CLI prints verbatim.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

// Input data problems (bad CSV rows, bad prices, misaligned series).
class DataError : public Error {
 public:
  using Error::Error;
};

class ParseError : public DataError {
 public:
  ParseError(std::string kind, std::size_t line, const std::string& message)
      : DataError(std::move(kind), "line " + std::to_string(line) + ": " + message),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class MalformedRow : public ParseError {
 public:
  MalformedRow(std::size_t line, const std::string& message)
      : ParseError("MalformedRow", line, message) {}
};

class NonMonotonicTimestamp : public ParseError {
 public:
  explicit NonMonotonicTimestamp(std::size_t line)
      : ParseError("NonMonotonicTimestamp", line, "timestamp does not strictly increase") {}
};

class InvalidPrice : public ParseError {
 public:
  InvalidPrice(std::size_t line, std::string field)
      : ParseError("InvalidPrice", line, "invalid value in field '" + field + "'"),
        field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

class EmptyInput : public DataError {
 public:
  explicit EmptyInput(const std::string& what) : DataError("EmptyInput", what) {}
};

class InsufficientHistory : public DataError {
 public:
  explicit InsufficientHistory(const std::string& what)
      : DataError("InsufficientHistory", what) {}
};

class NonPositivePrice : public DataError {
 public:
  explicit NonPositivePrice(const std::string& what) : DataError("NonPositivePrice", what) {}
};

class AlignmentError : public DataError {
 public:
  explicit AlignmentError(const std::string& what) : DataError("AlignmentError", what) {}
};

class MismatchedRange : public DataError {
 public:
  explicit MismatchedRange(const std::string& what) : DataError("MismatchedRange", what) {}
};

class NotEnoughData : public DataError {
 public:
  explicit NotEnoughData(const std::string& what) : DataError("NotEnoughData", what) {}
};

class MissingRunArtifacts : public DataError {
 public:
  explicit MissingRunArtifacts(const std::string& what)
      : DataError("MissingRunArtifacts", what) {}
};

// Numerical / model-shape problems.
class DimensionMismatch : public Error {
 public:
  explicit DimensionMismatch(const std::string& what) : Error("DimensionMismatch", what) {}
};

class MissingCache : public Error {
 public:
  explicit MissingCache(const std::string& what) : Error("MissingCache", what) {}
};

class NonFiniteQ : public Error {
 public:
  explicit NonFiniteQ(const std::string& what) : Error("NonFiniteQ", what) {}
};

class InvalidState : public Error {
 public:
  explicit InvalidState(const std::string& what) : Error("InvalidState", what) {}
};

class UnknownState : public Error {
 public:
  explicit UnknownState(const std::string& what) : Error("UnknownState", what) {}
};

class UnknownAction : public Error {
 public:
  explicit UnknownAction(const std::string& what) : Error("UnknownAction", what) {}
};

class InsufficientCash : public Error {
 public:
  explicit InsufficientCash(const std::string& what) : Error("InsufficientCash", what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error("ConfigError", what) {}
};

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& what) : Error("UsageError", what) {}
};

}  // namespace drqn

#pragma once

#include <stdexcept>
#include <string>

namespace ngcl {

// Failure classes map onto CLI exit codes (usage 1, data 2, numeric 3).
enum class ErrorKind { kUsage, kData, kNumeric };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Argument outside an operation's precondition.
class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& what) : Error(ErrorKind::kUsage, what) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorKind::kData, what) {}
};

class ParseError : public DataError {
 public:
  ParseError(const std::string& source, long line, const std::string& what)
      : DataError(source + ":" + std::to_string(line) + ": " + what), line_(line) {}
  long line() const noexcept { return line_; }

 private:
  long line_;
};

// Dimension disagreement between inputs.
class ShapeError : public DataError {
 public:
  explicit ShapeError(const std::string& what) : DataError(what) {}
};

class MissingArtifactError : public DataError {
 public:
  explicit MissingArtifactError(const std::string& what) : DataError(what) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what) : Error(ErrorKind::kNumeric, what) {}
};

// Input without the structure an operation needs (all-zero graph, one-class batch, ...).
class DegenerateError : public NumericError {
 public:
  explicit DegenerateError(const std::string& what) : NumericError(what) {}
};

class SingularError : public NumericError {
 public:
  explicit SingularError(const std::string& what) : NumericError(what) {}
};

}  // namespace ngcl

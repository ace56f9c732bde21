#pragma once

#include <stdexcept>
#include <string>

namespace ldptail {

// Broad failure classes. The CLI maps each one to its own exit status.
enum class ErrorKind {
  kConfig,     // invalid parameters or arguments outside a function's domain
  kData,       // unreadable or unusable input data
  kDegenerate, // numerically degenerate situation (ties, empty events, ...)
  kInternal,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::kConfig, what) {}
};

// Argument outside the mathematical domain of a function.
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error(ErrorKind::kConfig, what) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorKind::kData, what) {}
};

class DegenerateError : public Error {
 public:
  explicit DegenerateError(const std::string& what)
      : Error(ErrorKind::kDegenerate, what) {}
};

// Membership along a scaling or shift path was observed to be non-monotone.
class MonotonicityError : public Error {
 public:
  explicit MonotonicityError(const std::string& what)
      : Error(ErrorKind::kDegenerate, what) {}
};

int exit_code(ErrorKind kind) noexcept;

}  // namespace ldptail

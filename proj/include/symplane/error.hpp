#pragma once

#include <stdexcept>
#include <string>

namespace symplane {

enum class ErrorKind {
  kInvalidInput,
  kInvalidPlane,
  kInsufficientData,
  kDegenerateConfiguration,
  kUndefinedMetric,
  kNoDepth,
  kOutOfBounds,
  kInvalidBundle,
  kIo,
};

const char* to_string(ErrorKind kind);

/// Every failure raised by the library carries a kind so callers (the CLI in
/// particular) can separate bad input from data that is merely degenerate.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace symplane

#pragma once

#include <stdexcept>
#include <string>

namespace ssm {

enum class ErrorKind {
  kInvalidConfig,
  kInvariantViolation,
  kNumeric,
  kParse,
  kIo,
  kRuntime,
};

const char* to_string(ErrorKind kind) noexcept;

/// Exit status used by the CLI for each error category.
int exit_code(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& what);

}  // namespace ssm

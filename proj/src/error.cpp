#include "ssm/error.hpp"

namespace ssm {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::kInvalidConfig: return "invalid-config";
    case ErrorKind::kInvariantViolation: return "invariant-violation";
    case ErrorKind::kNumeric: return "numeric";
    case ErrorKind::kParse: return "parse";
    case ErrorKind::kIo: return "io";
    case ErrorKind::kRuntime: return "runtime";
  }
  return "unknown";
}

int exit_code(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::kParse: return 2;
    case ErrorKind::kInvalidConfig: return 3;
    case ErrorKind::kIo: return 4;
    case ErrorKind::kNumeric: return 5;
    case ErrorKind::kInvariantViolation: return 6;
    case ErrorKind::kRuntime: return 7;
  }
  return 1;
}

void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace ssm

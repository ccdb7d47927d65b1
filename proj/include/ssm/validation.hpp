#pragma once

// End-to-end acceptance checks, shared by the acceptance test binary and the
// `validate` CLI subcommand.

#include <cstdint>
#include <string>
#include <vector>

namespace ssm {

struct CheckResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

inline constexpr int kAcceptanceCount = 12;

/// Runs check `id` (1-based). Never throws: errors become failed results.
CheckResult run_check(int id, std::uint64_t seed = 20240611);

std::vector<CheckResult> run_acceptance(const std::vector<int>& ids, std::uint64_t seed = 20240611);

/// One line: "PASS  3 mm-monotonicity  <detail>  (1.23 s)".
std::string format_check(const CheckResult& r);

}  // namespace ssm

#pragma once

#include <string>
#include <vector>

#include "spstab/config.hpp"

namespace spstab {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

/// Runs the built-in invariant suites on the configured grid and eos. A suite
/// that throws is reported as failed with the exception text.
std::vector<CheckResult> run_selfcheck(const RunConfig& config);

}  // namespace spstab

#pragma once

#include <string>
#include <vector>

namespace specstop {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Fast invariant suite: limit-weight properties on random admissible
/// parameters, data-driven weight monotonicity, and the bias-variance
/// identity at n = 1000 on a diagonal problem. Runs in about a second.
std::vector<CheckResult> run_selfcheck(unsigned long long seed = 20240917ULL);

}  // namespace specstop

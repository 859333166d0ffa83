#pragma once

#include <string>
#include <vector>

namespace ftcl {

struct SelfTestResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Fast invariant checks over the filter, estimators and bound calculators.
std::vector<SelfTestResult> run_selftests();

}  // namespace ftcl

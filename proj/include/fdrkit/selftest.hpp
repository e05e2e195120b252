#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fdrkit {

/// Fault injection for testing the self-test itself.
struct SelfTestHooks {
  /// Multiplies the kernel inside the normalization check only.
  double kernel_scale = 1.0;
};

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Reduced-size oracle and invariant checks.
std::vector<CheckResult> run_selftest(const SelfTestHooks& hooks = {});

/// Prints the pass/fail table; returns 0 when every check passes, 1 otherwise.
int cmd_selftest(std::ostream& out, const SelfTestHooks& hooks = {});

}  // namespace fdrkit

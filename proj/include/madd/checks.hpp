#pragma once

#include <string>
#include <vector>

#include "madd/process_model.hpp"

namespace madd {

struct CheckResult {
  std::string name;
  bool passed = false;
  /// Measured quantity (residual, max radius, ...), NaN if the check threw.
  double value = 0.0;
  double threshold = 0.0;
  std::string detail;
};

struct CheckOptions {
  int directions = 16;
  /// Paths for the Monte-Carlo agreement check; 0 skips it.
  long long mc_paths = 20000;
  unsigned long long seed = 7;
};

/// Invariant battery: structure, transforms, sections, boundary, Doob
/// transform and Green-function agreement. Each entry records its own
/// failure; the function itself only throws for malformed input.
[[nodiscard]] std::vector<CheckResult> run_checks(const ProcessSpec& spec, const CheckOptions& options = {});

}  // namespace madd

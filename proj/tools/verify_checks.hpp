#pragma once

#include <string>
#include <vector>

namespace empcosmo::cli {

struct CheckResult {
  std::string name;
  double max_abs_residual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

// The built-in verification battery: conservation, EMP reduction, closed
// forms, appendix integrals, special-function oracles, and both cosmology
// pipelines.  Deterministic; safe to run checks concurrently.
std::vector<CheckResult> builtin_checks(int jobs);

// Checks applied to an externally supplied trajectory table.
std::vector<CheckResult> trajectory_checks(const std::string& csv_path);

}  // namespace empcosmo::cli

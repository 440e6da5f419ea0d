#pragma once

// Invariant suites shared by the acceptance test and the selftest command.

#include <cstdint>
#include <string>
#include <vector>

namespace kacrice {

struct CheckResult {
  std::string suite;
  std::string name;
  bool passed = false;
  double measured = 0.0;  // passes when lower <= measured <= upper
  double lower = 0.0;
  double upper = 0.0;
  double seconds = 0.0;
};

struct SuiteSummary {
  std::string suite;
  std::vector<CheckResult> checks;
  double seconds = 0.0;

  bool passed() const;
};

// Factorization, F~ cancellation, quadratic perturbation, Vandermonde and transfer
// chain rule, moment/cumulant transforms, Hermite-Genocchi, Schur identities with a
// rejection-sampling check, and positivity of divided-difference covariances.
std::vector<SuiteSummary> run_property_suites(std::uint64_t seed = 1);

// A suite that always fails, for exercising failure reporting.
SuiteSummary injected_failure_suite();

}  // namespace kacrice

#pragma once

#include <stdexcept>
#include <string>

namespace dirate {

/// Model or measure data violates a structural invariant (bad rows, missing
/// contexts, non-ergodic chains, malformed files).
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// An exact computation would exceed its configured state or iteration budget.
struct BudgetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Inputs are structurally fine but outside the domain an operation supports
/// (e.g. a distortion target beyond the validity bound).
struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace dirate

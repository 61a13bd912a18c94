#pragma once

#include <stdexcept>
#include <string>

namespace selfloc {

// Bad user input: malformed files, bad policies, unknown names.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A dependence function produced something off the simplex.
struct RangeViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// An analysis that needs derivatives met a non-differentiable dependant.
struct DerivativeUnavailable : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// (I - Q) singular, or a rollout ran past its step cap.
struct TerminationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CapExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A construction does not apply to this problem (LSGT outside the simple
// cases, GT on non-identity dependants, sampler/dependence mismatch).
struct NotApplicable : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace selfloc

#ifndef CHM_ERRORS_HPP
#define CHM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace chm {

// Exit codes used by the CLI.
enum ExitCode : int {
  kExitOk = 0,
  kExitConfigError = 2,
  kExitNumericalError = 3,
  kExitInvariantError = 4,
};

// Bad configuration, schema violations, inconsistent parameters.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Numerical failures: step-size underflow, root-finder non-convergence,
// exhausted mode cutoffs, pole evaluation.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A stated invariant of a data product failed.
struct InvariantError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace chm

#endif

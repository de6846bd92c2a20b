#pragma once

#include <iosfwd>

namespace gae::cli {

/// Exit codes shared by every subcommand.
enum ExitCode : int {
  kOk = 0,
  kUsageError = 1,
  kDataError = 2,
  kNumericalFailure = 3,
};

/// Entry point of the `gae` tool. Normal output goes to `out`, diagnostics
/// to `err`.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace gae::cli

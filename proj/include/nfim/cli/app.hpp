#pragma once

#include <iosfwd>

namespace nfim::cli {

/// Exit statuses of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,         ///< every verdict holds
  kExitFailure = 1,    ///< execution error (numerical failure, I/O)
  kExitCheckFailed = 2,
  kExitUsage = 64,     ///< bad arguments or configuration
};

/// Entry point of the `nfim` executable. The JSON report goes to `out` unless
/// an output path is configured; human-readable progress goes to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace nfim::cli

#pragma once

#include <iosfwd>

namespace t2t {

/// Exit statuses of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,    ///< bad flags, config or checkpoint mismatch
  kExitData = 2,     ///< missing or malformed input files
  kExitNumeric = 3,  ///< non-finite loss, failed gradient check
};

/// Runs one subcommand: synth-data, train, eval, predict, adapt, gradcheck.
/// Results go to `out`; the resolved config, progress and errors to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace t2t

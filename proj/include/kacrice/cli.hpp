#pragma once

#include <iosfwd>

namespace kacrice {

/// Exit codes of the command-line front end.
enum ExitCode : int {
  kExitOk = 0,
  kExitUnexpected = 1,
  kExitValidation = 2,
  kExitHypothesis = 3,
  kExitNumerical = 4,
};

/// Runs the kacrice command line (subcommands expect, bound, mc, exact1d,
/// constants, hyp). Output goes to `out` unless --out names a file.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace kacrice

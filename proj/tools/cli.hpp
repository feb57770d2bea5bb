#pragma once

#include <iosfwd>

namespace levykac::cli {

enum ExitCode : int { kOk = 0, kPrecondition = 2, kCertification = 3 };

/// Runs the command line tool. Tables go to `out` unless --out names a
/// directory; diagnostics go to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace levykac::cli

#pragma once

#include <iosfwd>

namespace dce::cli {

enum ExitCode : int { kSuccess = 0, kInputError = 2, kNotConverged = 3 };

/// Runs `dce <subcommand> ...`. Reports go to `out`, diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace dce::cli

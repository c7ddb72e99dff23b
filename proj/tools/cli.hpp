#pragma once

#include <ostream>

namespace crnr::cli {

enum ExitCode : int {
    exit_ok = 0,
    exit_usage = 2,
    exit_numeric = 3,
    exit_nonconvergence = 4,
};

/// Parses argv, runs one subcommand, writes artifacts, and prints a
/// one-line JSON summary to `out` (diagnostics go to `err`).
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace crnr::cli

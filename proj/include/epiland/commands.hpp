#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace epiland {

enum ExitCode : int { exit_ok = 0, exit_failure = 1, exit_config = 2, exit_abort = 3 };

/// Command-line entry point: `run`, `ensemble`, `exit-study`, `landscape`.
/// Returns the process exit code; never throws.
int run_cli(std::span<const std::string> args, std::ostream& out, std::ostream& err);
int run_cli(int argc, const char* const* argv);

}  // namespace epiland

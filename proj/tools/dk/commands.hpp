#pragma once

#include <ostream>

#include "config.hpp"

namespace dkcli {

enum ExitCode { exit_ok = 0, exit_config = 1, exit_numerical = 2, exit_oracle = 3 };

/// Exit code for a library error kind.
int exit_code_for(dk::ErrorKind kind) noexcept;

/// Runs the configured command, writes its artifacts and returns the exit code.
/// Library errors propagate to the caller.
int run(const RunConfig& cfg, std::ostream& log);

}  // namespace dkcli

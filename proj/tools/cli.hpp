#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace probfuse::cli {

/// Exit codes shared by every subcommand.
enum ExitCode : int { kOk = 0, kIoFailure = 1, kUsage = 2 };

/// Runs the command line front end. Normal output goes to `out`, progress and the one-line
/// error record to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace probfuse::cli

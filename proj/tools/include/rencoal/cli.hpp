#pragma once

// Command-line driver. Kept in a library so tests can call it without
// spawning processes.

#include <iosfwd>
#include <string>
#include <vector>

namespace rencoal::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kData = 2,
  kNotConverged = 3,
};

/// Runs one invocation. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rencoal::cli

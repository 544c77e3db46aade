#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace covfield::cli {

/// Exit status of `run`.
enum ExitCode : int {
  kOk = 0,
  kRuntimeError = 1,
  kUsageError = 2,
};

/// Runs one subcommand. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run(int argc, const char* const* argv);

}  // namespace covfield::cli

#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace cvqkd::cli {

enum ExitCode : int {
  kOk = 0,
  kValidationFailed = 1,
  kUsage = 2,
  kDomain = 3,
  kIo = 4,
};

/// Entry point of the `cvqkd` tool: subcommands rate, sweep, attack, validate.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Same, with args[0] the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cvqkd::cli

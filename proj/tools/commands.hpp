#pragma once

#include <iosfwd>
#include <span>
#include <string>

namespace faqrank::cli {

enum ExitCode : int {
  kOk = 0,
  kInternal = 1,
  kUsage = 2,
  kValidation = 3,
  kIo = 4,
};

/// Parses `args` (args[0] is the program name) and runs the subcommand.
/// Returns the process exit code.
int run(std::span<const std::string> args, std::istream& in, std::ostream& out,
        std::ostream& err);

}  // namespace faqrank::cli

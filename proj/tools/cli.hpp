#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace climatescope::cli {

enum ExitCode : int {
  kSuccess = 0,
  kUsage = 1,
  kDataError = 2,
  kNumericError = 3,
  kBackendError = 4,
};

/// Runs one command line. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace climatescope::cli

#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace wildlong::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 2,
  kInput = 3,
  kBackend = 4,
  kInternal = 5,
};

/// Runs the command line `args` (without the program name). Help and
/// results go to `out`, diagnostics to `err`.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace wildlong::cli

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace kserver::cli {

enum ExitCode : int {
  kOk = 0,
  kDomainError = 1,
  kUsageError = 2,
  kCertificateFailed = 3,
};

// Runs the command line `args` (without the program name). Data and summaries
// go to `out`, diagnostics to `err`.
int run(std::vector<std::string> args, std::ostream& out, std::ostream& err);

}  // namespace kserver::cli

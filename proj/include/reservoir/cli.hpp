#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace reservoir::cli {

// Process exit codes.
enum ExitCode : int {
  kOk = 0,
  kCheckFailed = 1,  // simulate/moran --simulate: statistic above threshold
  kUsage = 2,
  kNumerical = 3,
  kBracket = 4,
};

// Runs the command line `args` (without the program name), writing the
// report to `out` (or --out PATH) and diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

std::string version();

}  // namespace reservoir::cli

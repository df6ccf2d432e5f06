#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace eyeid::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kData = 2, kCompute = 3 };

/// Runs the command line `args` (without the program name). Normal output goes
/// to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace eyeid::cli

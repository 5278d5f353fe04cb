#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace atomcavity::cli {

enum ExitCode { kOk = 0, kUsage = 1, kDiverged = 2, kIo = 3 };

/// Runs the command line `args` (without the program name); output goes to
/// `out`, diagnostics and help to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace atomcavity::cli

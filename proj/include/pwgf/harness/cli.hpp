#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace pwgf::harness {

enum ExitCode : int { kExitOk = 0, kExitConfig = 1, kExitNumeric = 2 };

/// Parse flags, run the experiment, write CSV and print the summary.
/// args[0] is the program name.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pwgf::harness

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hybridrc {

/// Exit statuses of the command-line tool.
enum ExitCode : int { kExitOk = 0, kExitVerdictFalse = 1, kExitUsage = 2, kExitInternal = 3 };

/// Entry point of the `hybridrc` tool. args[0] is the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hybridrc

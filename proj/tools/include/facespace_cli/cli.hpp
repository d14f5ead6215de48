#pragma once

#include <string>
#include <vector>

namespace facespace::cli {

/// Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
enum ExitCode : int { kOk = 0, kUsage = 1, kData = 2, kNumerical = 3 };

int run_cli(int argc, char** argv);
/// Convenience for tests; args exclude the program name.
int run_cli(const std::vector<std::string>& args);

}  // namespace facespace::cli

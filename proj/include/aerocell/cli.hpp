#pragma once

#include <string>
#include <vector>

namespace aerocell::cli {

// Runs one CLI invocation (argv without the program name) and returns the
// process exit code: 0 success, 2 invalid arguments or configuration,
// 3 malformed input data.
int run_cli(const std::vector<std::string>& args);

}  // namespace aerocell::cli

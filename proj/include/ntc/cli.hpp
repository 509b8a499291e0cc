#pragma once

#include <string>
#include <vector>

namespace ntc::cli {

// Runs one subcommand (args exclude the program name). Exit codes:
//   0 success, 1 check failure, 2 input/config error, 3 training divergence.
int run(const std::vector<std::string>& args);

}  // namespace ntc::cli

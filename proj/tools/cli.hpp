#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace rtfcs::cli {

enum ExitCode : int {
    kOk = 0,
    kFailure = 1,
    kUsage = 2,
    kConfig = 3,
    kNumeric = 4,
    kIo = 5,
    kPartial = 6,
};

// Runs one command line (args[0] is the subcommand) and returns the exit
// code. Messages go to `out` and `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rtfcs::cli

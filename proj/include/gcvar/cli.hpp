#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace gcvar::cli {

/// Runs one command line (program name excluded) and returns the exit code:
/// 0 success, 2 usage or I/O, 3 numerical failure, 4 identification failure.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gcvar::cli

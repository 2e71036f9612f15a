#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mcagg {

/// Command-line entry point. args excludes the program name. Returns 0 on
/// success, 1 on invalid input or usage, 2 on file-system failures.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mcagg

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cascade {

/// Command-line entry point. `args` excludes the program name. Errors are
/// written to `err` as one JSON object; the return value is the exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cascade

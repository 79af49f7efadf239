#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace tdmc {

// Entry point of the command-line tool. `args` excludes the program name.
// Returns 0 on success, 1 on a configuration or usage error and 2 when a run
// fails (population explosion, degenerate weights, I/O).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tdmc

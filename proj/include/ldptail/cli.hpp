#pragma once

#include <iosfwd>

namespace ldptail {

// Entry point of the command-line tool. Subcommands: simulate, estimate,
// marginal-fit, experiment, ratefn. Returns the process exit status:
// 0 ok, 2 configuration, 3 data, 4 numerically degenerate, 5 internal.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ldptail

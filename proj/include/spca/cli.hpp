#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace spca {

/// Runs the command line `args` (without the program name). Subcommands:
/// simulate, rates, verify, pack. Returns 0 on success, 1 on usage or
/// validation errors, 2 on runtime errors.
int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace spca

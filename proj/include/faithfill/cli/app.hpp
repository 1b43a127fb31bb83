#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace faithfill::cli {

/// Runs one subcommand. Returns 0 on success, 1 on validation errors
/// (including usage errors and unknown subcommands), 2 on runtime failures.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int dispatch(int argc, char** argv);

}  // namespace faithfill::cli

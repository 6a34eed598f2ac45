#pragma once

#include <string>
#include <vector>

namespace lanecrit {

/// Entry point of the command-line tool; returns the process exit code.
int run_cli(int argc, const char* const* argv);

/// Convenience overload; args[0] is the program name.
int run_cli(const std::vector<std::string>& args);

}  // namespace lanecrit

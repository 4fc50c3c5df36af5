#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace tkgf {

// Entry point of the `tkgf` tool; returns the process exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tkgf

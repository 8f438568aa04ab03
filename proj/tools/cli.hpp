#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace trailmine::cli {

/// Runs one CLI invocation; args excludes the program name.
/// Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace trailmine::cli

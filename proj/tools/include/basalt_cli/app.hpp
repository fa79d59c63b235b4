#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace basalt::cli {

/// Runs `basalt-lab` with args[0] as the program name. Returns the process exit
/// code: 0 on success, 2 on usage errors, 3 on data errors.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace basalt::cli

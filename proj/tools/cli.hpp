#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace vtd::cli {

// Runs one `vtd` invocation; `args` excludes the program name. Returns the
// process exit status: 0 success, 1 validation error, 2 I/O error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace vtd::cli

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace treeid {

// Entry point of the `treeid` executable. `args` excludes the program name.
// Returns 0 on success, 1 on usage errors, 2 on model or validity errors.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace treeid

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace myobench {

/// Entry point of the myobench tool. `args` excludes the program name.
/// Returns 0 on success, 1 on a runtime error, 2 on a usage error; errors are
/// reported as a single "error: <category>: <message>" line on `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace myobench

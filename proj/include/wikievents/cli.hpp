#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "wikievents/error.hpp"

namespace wikievents::cli {

// 0 success, 2 configuration, 3 input data or IO, 4 model backend,
// 5 incomplete annotation.
int ExitCodeFor(ErrorKind kind);

// Runs one command line (args[0] is the program name). Never throws; errors
// are reported on `err` and turned into an exit code. `in` feeds the
// interactive annotate command.
int Run(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
        std::ostream& err);

}  // namespace wikievents::cli

#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace hssalt::cli {

enum ExitCode : int {
  kSuccess = 0,
  kRuntimeError = 1,
  kArgumentError = 2,
  kFitError = 3,
};

/// Runs the command line `args` (without the program name). Reports go to
/// `out` unless an output path is given; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hssalt::cli

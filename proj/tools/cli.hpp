#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace aerovkc::cli {

enum ExitCode : int {
  kOk = 0,
  kConstraintFailure = 1,
  kUsage = 2,
  kConfigError = 3,
  kScenarioError = 4,
  kIoError = 5,
  kSimulationFailure = 6,
  kInternalError = 7,
};

/// Runs one command; `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace aerovkc::cli

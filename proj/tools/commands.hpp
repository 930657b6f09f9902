#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace lsirm::cli {

enum ExitCode : int {
  kSuccess = 0,
  kInputError = 2,
  kNumericFailure = 3,
  kNonConvergence = 4,
};

/// Entry point shared by the executable and the in-process tests.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lsirm::cli

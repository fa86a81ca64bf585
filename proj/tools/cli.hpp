#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace osncrypt::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kInputError = 2,
  kPolicyRejection = 3,
};

// Runs one command. args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace osncrypt::cli

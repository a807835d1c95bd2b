#ifndef MBLM_TOOLS_CLI_HH
#define MBLM_TOOLS_CLI_HH

#include <iosfwd>
#include <string>
#include <vector>

#include "mblm/error.hh"

namespace mblm::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kUsageError = 2,
  kIoError = 3,
  kMalformedInputError = 4,
  kIncompatibleModelError = 5,
  kCorruptModelError = 6,
  kUnsupportedError = 7,
  kClassificationError = 8,
};

int exit_code(ErrorKind kind);

// args excludes the program name.
int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

}  // namespace mblm::cli

#endif  // MBLM_TOOLS_CLI_HH

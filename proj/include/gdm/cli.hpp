#pragma once

#include <iosfwd>

namespace gdm::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kDataError = 2,
  kNonConvergence = 3,
};

/// Entry point of the `gdm` tool. Data goes to `out` or files, diagnostics
/// to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace gdm::cli

#pragma once

#include <iosfwd>

namespace relumip::cli {

enum ExitCode { kSuccess = 0, kUsage = 1, kInfeasible = 2, kInternal = 3 };

/// Entry point of the relumip command; results go to `out`, messages and logs to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace relumip::cli

#pragma once

#include <iosfwd>

namespace fedsurv::cli {

/// Exit codes of the fedsurv command line.
inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

/// Entry point behind `fedsurv`; all output goes to the given streams unless
/// a subcommand writes to --out.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace fedsurv::cli

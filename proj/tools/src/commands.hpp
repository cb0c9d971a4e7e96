#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fxband::cli {

/// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitCheckFailed = 2;

/// Runs one fxband command. `args` excludes the program name. Results go to
/// `out` only when the command succeeds; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fxband::cli

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace levyspde {

/// Exit codes of the command-line surface.
inline constexpr int kExitPass = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitFail = 2;

/// Runs `levyspde <args...>` (args exclude the program name). CSV goes to
/// `out` or to files under the output directory; diagnostics go to `err`.
int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

std::string usage_text();

}  // namespace levyspde

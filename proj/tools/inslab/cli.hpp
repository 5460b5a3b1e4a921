#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace inslab::cli {

/// Exit codes of `run`.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;      // numeric or data failure
inline constexpr int kExitConfigError = 2;  // bad flag, missing or unknown key

/// Entry point of the `inslab` tool: simulate | estimate | mc | validate-menu
/// | oracle. args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace inslab::cli

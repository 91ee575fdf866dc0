#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace robustglm {

/// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 1;
inline constexpr int kExitNotConverged = 2;

/// Entry point of the robustglm command line tool. `args` excludes the
/// program name. Normal output goes to `out` unless --output is given;
/// diagnostics go to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace robustglm

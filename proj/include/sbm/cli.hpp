#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sbm::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kUsage = 1;
inline constexpr int kFailure = 2;
inline constexpr int kReplayMismatch = 3;

// Runs one subcommand; `args` excludes the program name. Reports go to
// `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sbm::cli

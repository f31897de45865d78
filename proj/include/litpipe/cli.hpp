#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace litpipe::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

// args excludes the program name. Files written are listed on out, one path
// per line; diagnostics go to err.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace litpipe::cli

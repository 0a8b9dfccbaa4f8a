#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace semap::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

// Entry point of the `semap` tool. args excludes the program name.
// Subcommands: run, eval, fuse-gt, synth, energy, merge.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace semap::cli

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ceca {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 1;
inline constexpr int kExitDataError = 2;

// Entry point of the `ceca` tool. args excludes the program name. Subcommands:
// synth, train, predict, evaluate, esa, benchmark.
int run_command(const std::vector<std::string>& args, std::ostream& out,
                std::ostream& err);

}  // namespace ceca

#pragma once

#include <string>
#include <vector>

namespace cganseg::cli {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;    // bad arguments or unusable input
inline constexpr int kExitNumeric = 3;  // training diverged
inline constexpr int kExitInternal = 1;

// Runs one command line, e.g. {"cganseg", "synth", "--count", "16", ...}.
int run(const std::vector<std::string>& args);

}  // namespace cganseg::cli

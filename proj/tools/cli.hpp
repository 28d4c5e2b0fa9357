#pragma once

// `fmmc solve|pareto|verify|simulate`. Exit codes: 0 ok, 1 verification
// failure, 2 bad input, 3 degenerate chain.

#include <iosfwd>
#include <string>
#include <vector>

namespace fmmc::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitVerifyFailed = 1;
inline constexpr int kExitBadInput = 2;
inline constexpr int kExitDegenerate = 3;

/// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fmmc::cli

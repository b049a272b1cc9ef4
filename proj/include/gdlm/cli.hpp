// SPDX-License-Identifier: MIT
#pragma once

#include <string>
#include <vector>

namespace gdlm::cli {

// Exit codes: 0 success, 2 argument error, 3 parse error,
// 4 solver non-convergence (with --strict) or stitch failure, 5 I/O error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitArgs = 2;
inline constexpr int kExitParse = 3;
inline constexpr int kExitSolver = 4;
inline constexpr int kExitIo = 5;

// Runs one subcommand (simulate, fit, eval, negfrac, bench); args exclude
// the program name.
int run(std::vector<std::string> args);

}  // namespace gdlm::cli

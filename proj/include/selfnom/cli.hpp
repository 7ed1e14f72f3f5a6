// SPDX-License-Identifier: Apache-2.0
//
// Experiment driver: gen-data, train, eval and pf-sim subcommands, each
// reading one record of a JSON config and writing fixed-name outputs under
// --out.
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace selfnom::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitMissingInput = 3;
inline constexpr int kExitNumerical = 4;

// Training exits with kExitNumerical when more than this fraction of batches
// contained a rank-deficient schedule.
inline constexpr double kRankDeficientBatchLimit = 0.01;

// `args` excludes the program name.
int run(std::vector<std::string> args, std::ostream& out, std::ostream& err);

}  // namespace selfnom::cli

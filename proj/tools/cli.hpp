#pragma once

#include <iosfwd>

namespace emolens::cli {

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitAnalysis = 4;

// Entry point shared by the `emolens` binary and the tests. Subcommands:
// train, eval, analyze, fixtures, serve.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace emolens::cli

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace meshconv::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  ///< computation ran and failed (gradcheck, stall with --strict)
inline constexpr int kExitUsage = 2;    ///< bad arguments, config, or I/O

/// Runs one command line (args[0] is the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace meshconv::cli

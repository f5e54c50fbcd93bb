#pragma once

#include <string>
#include <vector>

namespace smfr::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNumeric = 3;
inline constexpr int kExitIo = 4;

/// Parses and executes one command line (without the program name). Returns
/// the process exit code; never throws. Failed commands leave a `.failed`
/// marker in the output directory instead of partial results.
int run(const std::vector<std::string>& args);

}  // namespace smfr::cli

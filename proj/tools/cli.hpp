#pragma once

#include <string>
#include <vector>

namespace flocksim::cli {

// Exit codes are a frozen interface for CI harnesses:
//   0 success (all verdicts pass), 1 verdict/validation failure (reports are
//   still written), 2 config error, 3 numerical blow-up.
inline constexpr int kExitOk = 0;
inline constexpr int kExitVerdictFail = 1;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitBlowup = 3;

inline constexpr const char* kToolVersion = "0.1.0";

int run_cli(const std::vector<std::string>& args);

}  // namespace flocksim::cli

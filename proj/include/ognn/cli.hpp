#pragma once

#include <ostream>

namespace ognn::cli {

/// Environment variable that overrides the configured output directory.
inline constexpr const char* kOutputDirEnv = "OGNN_OUTPUT_DIR";

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitNumeric = 2;

/// Runs one subcommand: fit-filter, classify, overpass-demo, verify-basis or
/// search. Returns 0 on success, 1 on configuration or input errors, 2 on
/// numeric failure (including a failed verify-basis tolerance).
int parse_and_run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ognn::cli

#pragma once

// Command-line front end. Exit codes: 0 success, 1 configuration or usage
// error, 2 runtime failure (including an interrupted sweep).

#include <iosfwd>

namespace grsm::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitRuntime = 2;

/// Environment variable consulted for the ber-sweep output directory when
/// --out is not given.
inline constexpr const char* kOutputDirEnv = "GRSM_OUTPUT_DIR";

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace grsm::cli

#pragma once

namespace geomimu::cli {

inline constexpr const char* kVersion = "0.1.0";

/// Parses argv and runs one subcommand. Exit codes: 0 success, 1
/// validation or usage error, 2 I/O error.
int run(int argc, const char* const* argv);

}  // namespace geomimu::cli

#pragma once

#include <iosfwd>

namespace rca::cli {

// Exit codes shared by every command.
inline constexpr int kSuccess = 0;
inline constexpr int kFailure = 1;
inline constexpr int kUsage = 2;

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace rca::cli

#pragma once

#include <iosfwd>

namespace eqw {

// Exit codes: 0 success, 1 scientific-check failure, 2 usage, 3 I/O.
inline constexpr int kExitOk = 0;
inline constexpr int kExitCheck = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitIo = 3;

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace eqw

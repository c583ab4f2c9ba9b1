#pragma once

#include <iosfwd>

namespace mvrec::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitConfig = 2;

/// Runs the `mvrec` command line. Diagnostics go to `err`, prefixed "error:".
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mvrec::cli

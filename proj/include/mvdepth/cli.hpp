#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mvdepth::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

/// Runs one subcommand. `args` excludes the program name. Reports go to
/// `out`, diagnostics and usage text to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// argv-style entry point writing to stdout/stderr.
int run(int argc, const char* const* argv);

}  // namespace mvdepth::cli

#pragma once

#include <iosfwd>
#include <string>

namespace infoop::cli {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int { ok = 0, failure = 1, config_error = 2, output_error = 3 };

// Parses argv (argv[0] is the program name), runs one subcommand and returns
// the process exit code. Diagnostics go to `err`, help and summaries to `out`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace infoop::cli

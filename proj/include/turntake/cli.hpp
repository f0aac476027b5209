#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace turntake {

/// Exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;      // usage, I/O or parse failure
inline constexpr int kExitLintErrors = 2;   // validate found error-severity diagnostics

/// Parses `key = value` lines; blank lines and `#` comments are skipped.
/// Throws std::invalid_argument on a line without `=`.
std::vector<std::pair<std::string, std::string>> parse_config(std::string_view text);

/// Runs the tool. `args` excludes the program name. Config values come from
/// `--config <file>` or, failing that, the file named by TURNTAKE_CONFIG;
/// flags given on the command line take precedence over both.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace turntake

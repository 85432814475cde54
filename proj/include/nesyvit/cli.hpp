#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace nesyvit::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitBadInput = 2;
inline constexpr int kExitNumeric = 3;

// Bad flag values that CLI11 cannot see, e.g. a malformed --bits string.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

const char* version();

/// Expands every `--config <file>` into `--key=value` arguments placed right
/// after the subcommand, so explicit flags (which come later) win.
std::vector<std::string> expand_config(const std::vector<std::string>& args);

/// Runs the command line; args[0] is the program name. Returns the exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace nesyvit::cli

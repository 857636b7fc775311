#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace crex::cli {

enum ExitCode : int {
  kOk = 0,
  kInputError = 1,
  kInfeasible = 2,
  kCapacity = 3,
  kNotConverged = 4,
};

/// Parses argv and runs one subcommand. Diagnostics go to err.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(const std::string& bytes);

}  // namespace crex::cli

#pragma once

// Command-line front end. Exit codes: 0 pass / witness found / accepted,
// 1 fail / no witness / rejected, 2 inconclusive, 64 malformed input or
// usage, 66 unreadable file.

#include <iosfwd>
#include <string>
#include <vector>

namespace relnet::cli {

inline constexpr int kExitUsage = 64;
inline constexpr int kExitNoInput = 66;

/// `args` excludes the program name.
int main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace relnet::cli

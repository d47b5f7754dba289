#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace threatgeo::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

/// Runs one CLI invocation; `args` excludes the program name.
int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

} // namespace threatgeo::cli

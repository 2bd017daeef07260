#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace tdesign::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailed = 1;  // a verification or design check failed
inline constexpr int kExitUsage = 2;   // bad flags, unknown names, unreadable files

/// args[0] is the program name. Results go to `out`, diagnostics and
/// progress to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tdesign::cli

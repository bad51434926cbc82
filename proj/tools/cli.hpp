#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace flats::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitData = 3;

/// Runs the `flats` command line. `args` excludes the program name.
/// Returns the process exit code: 0 success, 2 configuration error,
/// 3 data error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace flats::cli

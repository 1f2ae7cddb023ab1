#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ensamp {

// Exit codes: 0 success, 1 runtime failure, 2 configuration or usage error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

// Environment variable naming the default output directory of `run`.
inline constexpr const char* kOutDirEnv = "ENSAMP_OUT_DIR";

// args excludes the program name.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int cli_main(int argc, char** argv);

}  // namespace ensamp

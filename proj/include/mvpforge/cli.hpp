#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace mvpforge::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitContent = 1;  // validation or content failure
inline constexpr int kExitIo = 2;       // environment or I/O failure

// Runs one `mvpforge` invocation. `args` excludes the program name. Reports
// go to `out` as JSON; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mvpforge::cli

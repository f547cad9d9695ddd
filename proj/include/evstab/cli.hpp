#pragma once

#include <string>
#include <vector>

namespace evstab {

// Entry point behind the evstab binary; separated so tests can drive it
// in-process. Exit codes: 0 success, 2 usage, 3 input format, 4 invariant or
// configuration violation. Errors print one line: "error: <kind>: <detail>".
int run_cli(const std::vector<std::string>& args);

}  // namespace evstab

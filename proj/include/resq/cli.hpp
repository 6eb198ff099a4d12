#pragma once

#include <string>
#include <vector>

namespace resq {

// Entry point behind the `resq` binary. argv excludes the program name.
// Returns 0 on success, 1 on component errors, 2 on usage errors.
int run_command(const std::vector<std::string>& argv);

}  // namespace resq

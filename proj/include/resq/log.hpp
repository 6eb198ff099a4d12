#pragma once

#include <string>

namespace resq {

enum class LogLevel { Error = 0, Info = 1, Debug = 2 };

// Level comes from the RESQ_LOG environment variable: error, info or debug.
LogLevel log_level();

void log_error(const std::string& message);
void log_info(const std::string& message);
void log_debug(const std::string& message);

}  // namespace resq

#pragma once

#include <string>

namespace demogen {

enum class LogLevel { kError = 0, kInfo = 1, kDebug = 2 };

// Level comes from DEMOGEN_LOG in {error, info, debug}; default error.
LogLevel log_level();

void log_error(const std::string& msg);
void log_info(const std::string& msg);
void log_debug(const std::string& msg);

}  // namespace demogen

#include "demogen/log.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace demogen {

LogLevel log_level() {
    static const LogLevel level = [] {
        const char* env = std::getenv("DEMOGEN_LOG");
        if (env == nullptr) return LogLevel::kError;
        if (std::strcmp(env, "debug") == 0) return LogLevel::kDebug;
        if (std::strcmp(env, "info") == 0) return LogLevel::kInfo;
        return LogLevel::kError;
    }();
    return level;
}

static void emit(const char* tag, const std::string& msg) {
    std::fprintf(stderr, "[%s] %s\n", tag, msg.c_str());
}

void log_error(const std::string& msg) { emit("error", msg); }

void log_info(const std::string& msg) {
    if (log_level() >= LogLevel::kInfo) emit("info", msg);
}

void log_debug(const std::string& msg) {
    if (log_level() >= LogLevel::kDebug) emit("debug", msg);
}

}  // namespace demogen

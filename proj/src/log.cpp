#include "trajirl/log.hpp"

#include <cstdlib>
#include <cstring>

namespace trajirl {

namespace {
LogLevel g_level = LogLevel::Info;

const char* level_tag(LogLevel lv) {
    switch (lv) {
        case LogLevel::Debug: return "debug";
        case LogLevel::Info: return "info";
        case LogLevel::Warn: return "warn";
        case LogLevel::Error: return "error";
        default: return "?";
    }
}
}  // namespace

LogLevel log_level() { return g_level; }
void set_log_level(LogLevel lv) { g_level = lv; }

void set_log_level_from_env() {
    const char* v = std::getenv("TRAJIRL_LOG");
    if (!v) return;
    if (!std::strcmp(v, "debug")) g_level = LogLevel::Debug;
    else if (!std::strcmp(v, "info")) g_level = LogLevel::Info;
    else if (!std::strcmp(v, "warn")) g_level = LogLevel::Warn;
    else if (!std::strcmp(v, "error")) g_level = LogLevel::Error;
    else if (!std::strcmp(v, "off")) g_level = LogLevel::Off;
}

void logf(LogLevel lv, const char* fmt, ...) {
    if (lv < g_level) return;
    std::fprintf(stderr, "[%s] ", level_tag(lv));
    va_list args;
    va_start(args, fmt);
    std::vfprintf(stderr, fmt, args);
    va_end(args);
    std::fputc('\n', stderr);
}

}  // namespace trajirl

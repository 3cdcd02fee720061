#pragma once

#include <cstdarg>
#include <cstdio>

namespace trajirl {

enum class LogLevel { Debug = 0, Info = 1, Warn = 2, Error = 3, Off = 4 };

LogLevel log_level();
void set_log_level(LogLevel lv);

/// Reads TRAJIRL_LOG (debug|info|warn|error|off); unset keeps the default (info).
void set_log_level_from_env();

/// printf-style; writes one line to stderr. stdout is reserved for results.
void logf(LogLevel lv, const char* fmt, ...)
#if defined(__GNUC__)
    __attribute__((format(printf, 2, 3)))
#endif
    ;

}  // namespace trajirl

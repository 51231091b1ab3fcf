#pragma once

#include <cstdarg>

namespace cluedex {

enum class LogLevel { kDebug = 0, kInfo = 1, kWarn = 2, kError = 3, kOff = 4 };

// Level comes from the CLUEDEX_LOG environment variable (debug|info|warn|error|off),
// read once. Default is warn.
LogLevel log_level();

void log_message(LogLevel level, const char* fmt, ...);

#define CLUEDEX_LOG_DEBUG(...) ::cluedex::log_message(::cluedex::LogLevel::kDebug, __VA_ARGS__)
#define CLUEDEX_LOG_INFO(...) ::cluedex::log_message(::cluedex::LogLevel::kInfo, __VA_ARGS__)
#define CLUEDEX_LOG_WARN(...) ::cluedex::log_message(::cluedex::LogLevel::kWarn, __VA_ARGS__)
#define CLUEDEX_LOG_ERROR(...) ::cluedex::log_message(::cluedex::LogLevel::kError, __VA_ARGS__)

}  // namespace cluedex

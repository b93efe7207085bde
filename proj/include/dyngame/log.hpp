#pragma once

// Minimal stderr logger controlled by the DYNGAME_LOG environment variable
// (debug | info | warn | error | off). Default: warn.

#include <cstdlib>
#include <iostream>
#include <string>

namespace dyngame {

enum class LogLevel { debug = 0, info, warn, error, off };

inline LogLevel log_level() {
  static const LogLevel level = [] {
    const char* env = std::getenv("DYNGAME_LOG");
    const std::string v = env ? env : "warn";
    if (v == "debug") return LogLevel::debug;
    if (v == "info") return LogLevel::info;
    if (v == "error") return LogLevel::error;
    if (v == "off") return LogLevel::off;
    return LogLevel::warn;
  }();
  return level;
}

inline void log(LogLevel level, const std::string& msg) {
  static const char* names[] = {"debug", "info", "warn", "error"};
  if (level >= log_level() && level != LogLevel::off)
    std::cerr << "[dyngame:" << names[static_cast<int>(level)] << "] " << msg << "\n";
}

inline void log_debug(const std::string& msg) { log(LogLevel::debug, msg); }
inline void log_info(const std::string& msg) { log(LogLevel::info, msg); }
inline void log_warn(const std::string& msg) { log(LogLevel::warn, msg); }
inline void log_error(const std::string& msg) { log(LogLevel::error, msg); }

}  // namespace dyngame

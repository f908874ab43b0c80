#pragma once

#include <cstdlib>
#include <iostream>
#include <string>
#include <string_view>

namespace softlex {

enum class LogLevel { Error = 0, Warn = 1, Info = 2, Debug = 3 };

// Level comes from the SOFTLEX_LOG env var (error|warn|info|debug), default warn.
inline LogLevel log_level() {
  static const LogLevel level = [] {
    const char* env = std::getenv("SOFTLEX_LOG");
    if (env == nullptr) return LogLevel::Warn;
    std::string_view v{env};
    if (v == "error") return LogLevel::Error;
    if (v == "warn") return LogLevel::Warn;
    if (v == "info") return LogLevel::Info;
    if (v == "debug") return LogLevel::Debug;
    return LogLevel::Warn;
  }();
  return level;
}

inline void log(LogLevel level, const std::string& msg) {
  if (level > log_level()) return;
  static constexpr const char* names[] = {"error", "warn", "info", "debug"};
  std::cerr << "[softlex:" << names[static_cast<int>(level)] << "] " << msg << "\n";
}

inline void log_error(const std::string& msg) { log(LogLevel::Error, msg); }
inline void log_warn(const std::string& msg) { log(LogLevel::Warn, msg); }
inline void log_info(const std::string& msg) { log(LogLevel::Info, msg); }
inline void log_debug(const std::string& msg) { log(LogLevel::Debug, msg); }

}  // namespace softlex

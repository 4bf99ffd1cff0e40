#pragma once

#include <cstdlib>
#include <iostream>
#include <mutex>
#include <string>

namespace lidaraug {

enum class LogLevel { Quiet = 0, Info = 1, Debug = 2 };

/// Process-wide log level, read once from the PGT_LOG environment variable:
/// "quiet"/"0", "info"/"1" (default), "debug"/"2".
inline LogLevel log_level() {
  static const LogLevel level = [] {
    const char* env = std::getenv("PGT_LOG");
    if (!env) return LogLevel::Info;
    const std::string v(env);
    if (v == "quiet" || v == "0") return LogLevel::Quiet;
    if (v == "debug" || v == "2") return LogLevel::Debug;
    return LogLevel::Info;
  }();
  return level;
}

namespace detail {
inline std::mutex& log_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace detail

inline void log_info(const std::string& msg) {
  if (log_level() >= LogLevel::Info) {
    std::lock_guard<std::mutex> lock(detail::log_mutex());
    std::cerr << "[info] " << msg << '\n';
  }
}

inline void log_debug(const std::string& msg) {
  if (log_level() >= LogLevel::Debug) {
    std::lock_guard<std::mutex> lock(detail::log_mutex());
    std::cerr << "[debug] " << msg << '\n';
  }
}

}  // namespace lidaraug

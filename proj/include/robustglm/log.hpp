#pragma once

#include <sstream>
#include <string>
#include <utility>

namespace robustglm {

enum class LogLevel { debug = 0, info = 1, warn = 2, off = 3 };

void set_log_level(LogLevel level);
LogLevel log_level();

/// Writes one line to stderr if `level` passes the threshold. Thread-safe.
void log_line(LogLevel level, const std::string& text);

template <class... Args>
void log(LogLevel level, Args&&... args) {
  if (level < log_level()) return;
  std::ostringstream out;
  (out << ... << std::forward<Args>(args));
  log_line(level, out.str());
}

}  // namespace robustglm

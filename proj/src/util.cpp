#include <atomic>
#include <cstdlib>
#include <iostream>
#include <mutex>
#include <string>
#include <thread>

#include "robustglm/log.hpp"
#include "robustglm/parallel.hpp"

namespace robustglm {

namespace {
std::atomic<LogLevel> g_level{LogLevel::warn};
std::mutex g_log_mutex;
}  // namespace

void set_log_level(LogLevel level) { g_level.store(level); }
LogLevel log_level() { return g_level.load(); }

void log_line(LogLevel level, const std::string& text) {
  if (level < log_level()) return;
  static constexpr const char* kTags[] = {"debug", "info", "warning", ""};
  std::lock_guard lock(g_log_mutex);
  std::cerr << "robustglm " << kTags[static_cast<int>(level)] << ": " << text << '\n';
}

int default_threads() {
  if (const char* env = std::getenv("ROBUSTGLM_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n > 0) return n;
    } catch (const std::exception&) {
    }
    log(LogLevel::warn, "ignoring invalid ROBUSTGLM_THREADS='", env, "'");
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace robustglm

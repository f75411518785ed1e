#include "ddir/log.hpp"

#include <atomic>
#include <iostream>

namespace ddir {

namespace {
std::atomic<LogLevel> g_level{LogLevel::warn};

void emit(LogLevel level, const char* tag, std::string_view msg) {
  if (static_cast<int>(g_level.load()) < static_cast<int>(level)) return;
  std::clog << "[ddir " << tag << "] " << msg << '\n';
}
}  // namespace

void set_log_level(LogLevel level) noexcept { g_level.store(level); }
LogLevel log_level() noexcept { return g_level.load(); }

void log_warn(std::string_view msg) { emit(LogLevel::warn, "warn", msg); }
void log_info(std::string_view msg) { emit(LogLevel::info, "info", msg); }
void log_debug(std::string_view msg) { emit(LogLevel::debug, "debug", msg); }

}  // namespace ddir

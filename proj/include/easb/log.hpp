#pragma once

// Leveled diagnostics on stderr through a shared spdlog logger. Verbosity
// comes from the EASB_LOG environment variable: off, error, warn (default),
// info, debug.

#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <memory>
#include <sstream>
#include <string_view>

namespace easb::log {

inline spdlog::level::level_enum parse_level(std::string_view text) {
  if (text == "off" || text == "0") return spdlog::level::off;
  if (text == "error") return spdlog::level::err;
  if (text == "info") return spdlog::level::info;
  if (text == "debug" || text == "trace") return spdlog::level::debug;
  return spdlog::level::warn;
}

inline spdlog::logger& logger() {
  static const std::shared_ptr<spdlog::logger> instance = [] {
    auto l = std::make_shared<spdlog::logger>("easb", std::make_shared<spdlog::sinks::stderr_sink_mt>());
    l->set_pattern("[easb %l] %v");
    const char* env = std::getenv("EASB_LOG");
    l->set_level(env ? parse_level(env) : spdlog::level::warn);
    return l;
  }();
  return *instance;
}

template <class... Args>
void write(spdlog::level::level_enum lv, const Args&... args) {
  auto& l = logger();
  if (!l.should_log(lv)) return;
  std::ostringstream line;
  (line << ... << args);
  l.log(lv, "{}", line.str());
}

template <class... Args> void error(const Args&... a) { write(spdlog::level::err, a...); }
template <class... Args> void warn(const Args&... a) { write(spdlog::level::warn, a...); }
template <class... Args> void info(const Args&... a) { write(spdlog::level::info, a...); }
template <class... Args> void debug(const Args&... a) { write(spdlog::level::debug, a...); }

}  // namespace easb::log

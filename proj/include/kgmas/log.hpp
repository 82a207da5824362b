#pragma once

#include <iostream>
#include <sstream>
#include <string_view>

namespace kgmas::log {

enum class Level { quiet = 0, info = 1, debug = 2 };

/// Diagnostics level, read once from KGMAS_LOG (quiet | info | debug).
Level level();

void write(Level at, std::string_view text);

template <typename... Args>
void info(const Args&... args) {
  if (level() < Level::info) return;
  std::ostringstream os;
  (os << ... << args);
  write(Level::info, os.str());
}

template <typename... Args>
void debug(const Args&... args) {
  if (level() < Level::debug) return;
  std::ostringstream os;
  (os << ... << args);
  write(Level::debug, os.str());
}

}  // namespace kgmas::log

#include "kgmas/log.hpp"

#include <cstdlib>
#include <mutex>
#include <string>

namespace kgmas::log {

Level level() {
  static const Level cached = [] {
    const char* env = std::getenv("KGMAS_LOG");
    if (env == nullptr) return Level::quiet;
    const std::string value(env);
    if (value == "debug") return Level::debug;
    if (value == "info") return Level::info;
    return Level::quiet;
  }();
  return cached;
}

void write(Level at, std::string_view text) {
  static std::mutex mu;
  std::lock_guard lock(mu);
  std::cerr << (at == Level::debug ? "[debug] " : "[info] ") << text << '\n';
}

}  // namespace kgmas::log

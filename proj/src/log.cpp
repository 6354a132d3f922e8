#include "nsch/log.hpp"

#include <atomic>
#include <cstdlib>
#include <iostream>
#include <mutex>
#include <string>

namespace nsch::log {

namespace {

Level from_env() {
  const char* s = std::getenv("NSCH_LOG_LEVEL");
  if (!s) return Level::Warn;
  const std::string v(s);
  if (v == "debug") return Level::Debug;
  if (v == "info") return Level::Info;
  if (v == "error") return Level::Error;
  if (v == "off") return Level::Off;
  return Level::Warn;
}

std::atomic<Level>& current() {
  static std::atomic<Level> l{from_env()};
  return l;
}

}  // namespace

Level level() { return current().load(); }
void set_level(Level l) { current().store(l); }

void write(Level l, std::string_view msg) {
  if (l < current().load()) return;
  static std::mutex m;
  static const char* names[] = {"debug", "info", "warn", "error"};
  std::lock_guard<std::mutex> lock(m);
  std::clog << "[nsch " << names[static_cast<int>(l)] << "] " << msg << '\n';
}

}  // namespace nsch::log

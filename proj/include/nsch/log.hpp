#pragma once

#include <string_view>

namespace nsch::log {

enum class Level { Debug = 0, Info = 1, Warn = 2, Error = 3, Off = 4 };

/// Initial level comes from NSCH_LOG_LEVEL (debug|info|warn|error|off),
/// default warn.
Level level();
void set_level(Level l);

void write(Level l, std::string_view msg);
inline void debug(std::string_view m) { write(Level::Debug, m); }
inline void info(std::string_view m) { write(Level::Info, m); }
inline void warn(std::string_view m) { write(Level::Warn, m); }
inline void error(std::string_view m) { write(Level::Error, m); }

}  // namespace nsch::log

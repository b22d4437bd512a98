#pragma once

#include <cstdio>
#include <string>

namespace playrec {

enum class LogLevel { Debug = 0, Info = 1, Warn = 2, Error = 3, Off = 4 };

LogLevel log_level();
void set_log_level(LogLevel lvl);
LogLevel parse_log_level(const std::string& name);

void log_msg(LogLevel lvl, const std::string& msg);

inline void log_debug(const std::string& msg) { log_msg(LogLevel::Debug, msg); }
inline void log_info(const std::string& msg) { log_msg(LogLevel::Info, msg); }
inline void log_warn(const std::string& msg) { log_msg(LogLevel::Warn, msg); }
inline void log_error(const std::string& msg) { log_msg(LogLevel::Error, msg); }

}  // namespace playrec

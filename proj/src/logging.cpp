#include "playrec/logging.hpp"

#include "playrec/errors.hpp"

namespace playrec {

namespace {
LogLevel g_level = LogLevel::Info;

const char* level_tag(LogLevel lvl) {
    switch (lvl) {
        case LogLevel::Debug: return "debug";
        case LogLevel::Info: return "info";
        case LogLevel::Warn: return "warn";
        case LogLevel::Error: return "error";
        default: return "?";
    }
}
}  // namespace

LogLevel log_level() { return g_level; }
void set_log_level(LogLevel lvl) { g_level = lvl; }

LogLevel parse_log_level(const std::string& name) {
    if (name == "debug") return LogLevel::Debug;
    if (name == "info") return LogLevel::Info;
    if (name == "warn") return LogLevel::Warn;
    if (name == "error") return LogLevel::Error;
    if (name == "off") return LogLevel::Off;
    throw ConfigError("unknown log level: " + name);
}

void log_msg(LogLevel lvl, const std::string& msg) {
    if (static_cast<int>(lvl) < static_cast<int>(g_level)) return;
    std::fprintf(stderr, "[%s] %s\n", level_tag(lvl), msg.c_str());
    std::fflush(stderr);
}

}  // namespace playrec

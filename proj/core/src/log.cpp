#include "rsched/log.hpp"

#include <cstdio>
#include <cstdlib>

namespace rsched {

LogLevel log_level() {
  static const LogLevel level = [] {
    const char* env = std::getenv("ROBUST_SCHED_LOG");
    if (env == nullptr || std::string(env) == "error") return LogLevel::Error;
    const std::string value(env);
    if (value == "info") return LogLevel::Info;
    if (value == "debug") return LogLevel::Debug;
    std::fprintf(stderr, "[robust-sched] unknown ROBUST_SCHED_LOG value `%s`, using error\n",
                 env);
    return LogLevel::Error;
  }();
  return level;
}

namespace {
void emit(const char* tag, const std::string& msg) {
  std::fprintf(stderr, "[%s] %s\n", tag, msg.c_str());
}
}  // namespace

void log_error(const std::string& msg) { emit("error", msg); }

void log_info(const std::string& msg) {
  if (log_level() >= LogLevel::Info) emit("info", msg);
}

void log_debug(const std::string& msg) {
  if (log_level() >= LogLevel::Debug) emit("debug", msg);
}

}  // namespace rsched

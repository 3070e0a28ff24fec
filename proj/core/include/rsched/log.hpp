#ifndef RSCHED_LOG_HPP
#define RSCHED_LOG_HPP

#include <string>

namespace rsched {

enum class LogLevel { Error = 0, Info = 1, Debug = 2 };

/// Level from ROBUST_SCHED_LOG (error|info|debug), parsed once; defaults to
/// error, warns once on an unknown value.
LogLevel log_level();

void log_error(const std::string& msg);
void log_info(const std::string& msg);
void log_debug(const std::string& msg);

}  // namespace rsched

#endif

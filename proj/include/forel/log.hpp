#pragma once

#include <string>

namespace forel {

enum class LogLevel { kError = 0, kInfo = 1, kDebug = 2 };

// Threshold comes from FOREL_LOG (error|info|debug); default error.
void InitLoggingFromEnv();
void Log(LogLevel level, const std::string& msg);

inline void LogError(const std::string& msg) { Log(LogLevel::kError, msg); }
inline void LogInfo(const std::string& msg) { Log(LogLevel::kInfo, msg); }
inline void LogDebug(const std::string& msg) { Log(LogLevel::kDebug, msg); }

}  // namespace forel

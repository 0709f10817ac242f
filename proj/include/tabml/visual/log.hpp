#ifndef TABML_VISUAL_LOG_HPP_
#define TABML_VISUAL_LOG_HPP_

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace tabml::visual {

enum class LogLevel { kInfo, kWarn, kError };

std::string_view LogLevelName(LogLevel level);

struct LogRecord {
  std::string timestamp;  // UTC, ISO 8601 with milliseconds
  std::string run_id;
  std::string stage;
  LogLevel level = LogLevel::kInfo;
  std::string message;
};

nlohmann::json ToJson(const LogRecord& record);

// UTC time in the log timestamp format.
std::string FormatTimestamp(std::chrono::system_clock::time_point t);
std::string NowTimestamp();

// Append-only, thread-safe log of one run. Records are kept in memory and,
// when a file is given, appended to it as JSON lines. Write failures go to
// `fallback` and never propagate.
class RunLog {
 public:
  explicit RunLog(std::string run_id, std::optional<std::filesystem::path> file = std::nullopt,
                  std::ostream* fallback = nullptr);

  RunLog(const RunLog&) = delete;
  RunLog& operator=(const RunLog&) = delete;

  void Log(std::string_view stage, LogLevel level, std::string message);
  void Info(std::string_view stage, std::string message) { Log(stage, LogLevel::kInfo, std::move(message)); }
  void Warn(std::string_view stage, std::string message) { Log(stage, LogLevel::kWarn, std::move(message)); }
  void Error(std::string_view stage, std::string message) { Log(stage, LogLevel::kError, std::move(message)); }

  std::vector<LogRecord> records() const;
  const std::string& run_id() const { return run_id_; }
  const std::optional<std::filesystem::path>& file() const { return file_; }

 private:
  std::string run_id_;
  std::optional<std::filesystem::path> file_;
  std::ostream* fallback_;
  mutable std::mutex mu_;
  std::ofstream out_;
  std::vector<LogRecord> records_;
  std::int64_t last_ms_ = 0;
};

}  // namespace tabml::visual

#endif  // TABML_VISUAL_LOG_HPP_

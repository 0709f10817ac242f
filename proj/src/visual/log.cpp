#include "tabml/visual/log.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <iostream>

namespace tabml::visual {

std::string_view LogLevelName(LogLevel level) {
  switch (level) {
    case LogLevel::kInfo:
      return "info";
    case LogLevel::kWarn:
      return "warn";
    case LogLevel::kError:
      return "error";
  }
  return "info";
}

nlohmann::json ToJson(const LogRecord& record) {
  return {{"timestamp", record.timestamp},
          {"run_id", record.run_id},
          {"stage", record.stage},
          {"level", LogLevelName(record.level)},
          {"message", record.message}};
}

namespace {

std::string FormatMillis(std::int64_t ms) {
  const std::time_t secs = static_cast<std::time_t>(ms / 1000);
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900,
                tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec,
                static_cast<int>(ms % 1000));
  return buf;
}

std::int64_t NowMillis() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

}  // namespace

std::string FormatTimestamp(std::chrono::system_clock::time_point t) {
  return FormatMillis(std::chrono::duration_cast<std::chrono::milliseconds>(t.time_since_epoch()).count());
}

std::string NowTimestamp() { return FormatMillis(NowMillis()); }

RunLog::RunLog(std::string run_id, std::optional<std::filesystem::path> file, std::ostream* fallback)
    : run_id_(std::move(run_id)), file_(std::move(file)), fallback_(fallback ? fallback : &std::cerr) {
  if (!file_) return;
  std::error_code ec;
  if (file_->has_parent_path()) std::filesystem::create_directories(file_->parent_path(), ec);
  out_.open(*file_, std::ios::app);
  if (!out_) *fallback_ << "log: cannot open " << file_->string() << "\n";
}

void RunLog::Log(std::string_view stage, LogLevel level, std::string message) {
  const auto now = NowMillis();
  std::lock_guard lock(mu_);
  last_ms_ = std::max<std::int64_t>(last_ms_, now);
  LogRecord record{FormatMillis(last_ms_), run_id_, std::string(stage), level, std::move(message)};
  if (out_.is_open()) {
    out_ << ToJson(record).dump() << '\n';
    out_.flush();
    if (!out_) {
      *fallback_ << "log: write failed for " << file_->string() << "\n";
      out_.clear();
    }
  }
  records_.push_back(std::move(record));
}

std::vector<LogRecord> RunLog::records() const {
  std::lock_guard lock(mu_);
  return records_;
}

}  // namespace tabml::visual

#include "tabml/service/notifier.hpp"

#include <chrono>
#include <fstream>
#include <thread>

#include <httplib.h>

namespace tabml::service {

namespace {

constexpr std::string_view kStageNotify = "notify";

struct Url {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

Url SplitUrl(const std::string& address) {
  const auto scheme_end = address.find("://");
  const auto path_start = scheme_end == std::string::npos ? std::string::npos : address.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {address, "/"};
  return {address.substr(0, path_start), address.substr(path_start)};
}

}  // namespace

nlohmann::json NotificationPayload(const Job& job) {
  nlohmann::json error = nullptr;
  if (job.error) error = {{"stage", job.error->stage}, {"code", job.error->code}, {"message", job.error->message}};
  return {{"job_id", job.job_id},
          {"state", JobStateName(job.state)},
          {"report", job.report ? nlohmann::json(*job.report) : nlohmann::json(nullptr)},
          {"error", error}};
}

Notifier::Notifier(NotifierOptions options) : options_(std::move(options)) {}

Delivery Notifier::Deliver(const pipeline::NotifySpec& spec, const Job& job, visual::RunLog& log) const {
  if (spec.mode == "webhook") return Post(spec.address, job, log);
  return WriteFile(job, log);
}

Delivery Notifier::WriteFile(const Job& job, visual::RunLog& log) const {
  Delivery d;
  d.attempts = 1;
  std::error_code ec;
  std::filesystem::create_directories(options_.outbox, ec);
  const auto final_path = options_.outbox / (job.job_id + ".json");
  const auto tmp = options_.outbox / (job.job_id + ".json.tmp");
  {
    std::ofstream f(tmp, std::ios::trunc);
    f << NotificationPayload(job).dump(2) << '\n';
    if (!f) {
      d.detail = "cannot write " + tmp.string();
      log.Error(kStageNotify, d.detail);
      return d;
    }
  }
  std::filesystem::rename(tmp, final_path, ec);
  if (ec) {
    d.detail = "cannot move notification into place: " + ec.message();
    log.Error(kStageNotify, d.detail);
    return d;
  }
  d.delivered = true;
  d.detail = final_path.string();
  log.Info(kStageNotify, "notification written to " + final_path.string());
  return d;
}

Delivery Notifier::Post(const std::string& address, const Job& job, visual::RunLog& log) const {
  Delivery d;
  const Url url = SplitUrl(address);
  const std::string body = NotificationPayload(job).dump();
  const auto timeout = std::chrono::duration<double>(options_.timeout_seconds);
  const std::size_t total = options_.retry_backoff_seconds.size() + 1;
  for (std::size_t attempt = 0; attempt < total; ++attempt) {
    if (attempt > 0) {
      const double wait = options_.retry_backoff_seconds[attempt - 1];
      log.Warn(kStageNotify, "webhook retry " + std::to_string(attempt) + " of " + std::to_string(total - 1) +
                                 " after " + std::to_string(wait) + " s: " + d.detail);
      std::this_thread::sleep_for(std::chrono::duration<double>(wait));
    }
    ++d.attempts;
    httplib::Client client(url.origin);
    client.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
    client.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
    client.set_write_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
    const auto res = client.Post(url.path, body, "application/json");
    if (res && res->status >= 200 && res->status < 300) {
      d.delivered = true;
      d.detail = "HTTP " + std::to_string(res->status);
      log.Info(kStageNotify, "webhook delivered to " + address + " (" + d.detail + ")");
      return d;
    }
    d.detail = res ? "HTTP " + std::to_string(res->status) : httplib::to_string(res.error());
  }
  log.Error(kStageNotify, "webhook delivery to " + address + " failed after " + std::to_string(d.attempts) +
                              " attempts: " + d.detail);
  return d;
}

}  // namespace tabml::service

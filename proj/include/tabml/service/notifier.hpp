#ifndef TABML_SERVICE_NOTIFIER_HPP_
#define TABML_SERVICE_NOTIFIER_HPP_

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tabml/pipeline/config.hpp"
#include "tabml/service/job_store.hpp"
#include "tabml/visual/log.hpp"

namespace tabml::service {

struct NotifierOptions {
  std::filesystem::path outbox;
  // Wait before each webhook retry; one retry per entry.
  std::vector<double> retry_backoff_seconds = {1.0, 4.0, 9.0};
  double timeout_seconds = 5.0;
};

struct Delivery {
  bool delivered = false;
  std::size_t attempts = 0;
  std::string detail;
};

// {job_id, state, report, error}
nlohmann::json NotificationPayload(const Job& job);

// File mode writes <outbox>/<job_id>.json; webhook mode POSTs the payload.
// Failures are logged under stage "notify" and never thrown.
class Notifier {
 public:
  explicit Notifier(NotifierOptions options);

  Delivery Deliver(const pipeline::NotifySpec& spec, const Job& job, visual::RunLog& log) const;

  const NotifierOptions& options() const { return options_; }

 private:
  Delivery WriteFile(const Job& job, visual::RunLog& log) const;
  Delivery Post(const std::string& address, const Job& job, visual::RunLog& log) const;

  NotifierOptions options_;
};

}  // namespace tabml::service

#endif  // TABML_SERVICE_NOTIFIER_HPP_

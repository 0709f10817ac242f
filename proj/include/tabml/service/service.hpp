#ifndef TABML_SERVICE_SERVICE_HPP_
#define TABML_SERVICE_SERVICE_HPP_

#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <deque>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "tabml/pipeline/config.hpp"
#include "tabml/service/dataset_store.hpp"
#include "tabml/service/job_store.hpp"
#include "tabml/service/notifier.hpp"

namespace tabml::service {

inline constexpr std::size_t kDefaultMaxUploadBytes = 100u * 1024u * 1024u;

struct ServiceOptions {
  std::filesystem::path data_root = "tabml-data";
  std::size_t workers = 2;
  double model_timeout_seconds = 120.0;
  std::size_t max_upload_bytes = kDefaultMaxUploadBytes;
  std::vector<double> webhook_backoff_seconds = {1.0, 4.0, 9.0};
  // Registered as dataset "demo" when set.
  std::optional<std::filesystem::path> demo_dataset;
};

struct Submission {
  std::optional<Job> job;
  std::vector<pipeline::FieldError> errors;  // invalid config
  bool dataset_missing = false;
};

// Datasets, jobs and the worker pool. Layout under data_root:
//   datasets/<id>/, jobs.jsonl, jobs/<job_id>/{report.json, plots/, model.json, log.jsonl}, outbox/
class JobService {
 public:
  explicit JobService(ServiceOptions options);
  ~JobService();

  JobService(const JobService&) = delete;
  JobService& operator=(const JobService&) = delete;

  // Requeues interrupted jobs, then starts the workers.
  void Start();
  // Lets running jobs finish; queued jobs stay queued in the journal.
  void Stop();

  Submission Submit(const nlohmann::json& config_doc);

  // Runs one queued job to a terminal state on the calling thread.
  void RunJob(const std::string& job_id);

  // Polls until the job is terminal; nullopt on timeout or unknown id.
  std::optional<Job> WaitForTerminal(const std::string& job_id, std::chrono::duration<double> timeout) const;

  std::filesystem::path JobDir(const std::string& job_id) const;
  std::filesystem::path LogPath(const std::string& job_id) const { return JobDir(job_id) / "log.jsonl"; }

  DatasetStore& datasets() { return datasets_; }
  JobStore& jobs() { return jobs_; }
  const JobStore& jobs() const { return jobs_; }
  const ServiceOptions& options() const { return options_; }

 private:
  void Enqueue(const std::string& job_id);
  void WorkerLoop();

  ServiceOptions options_;
  DatasetStore datasets_;
  JobStore jobs_;
  Notifier notifier_;

  std::mutex queue_mu_;
  std::condition_variable queue_cv_;
  std::deque<std::string> queue_;
  bool stopping_ = false;
  std::vector<std::thread> workers_;
};

// Report link stored on succeeded jobs.
std::string ReportLink(const std::string& job_id);

}  // namespace tabml::service

#endif  // TABML_SERVICE_SERVICE_HPP_

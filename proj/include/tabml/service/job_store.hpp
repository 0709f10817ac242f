#ifndef TABML_SERVICE_JOB_STORE_HPP_
#define TABML_SERVICE_JOB_STORE_HPP_

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace tabml::service {

enum class JobState { kQueued, kRunning, kSucceeded, kFailed, kTimedOut };

std::string_view JobStateName(JobState state);
std::optional<JobState> ParseJobState(std::string_view name);
bool IsTerminal(JobState state);

// queued -> running -> {succeeded, failed, timed_out}. Terminal states are
// absorbing.
bool IsLegalTransition(JobState from, JobState to);

struct JobError {
  std::string stage;
  std::string code;
  std::string message;
};

struct Job {
  std::string job_id;
  std::string dataset_id;
  nlohmann::json config;
  JobState state = JobState::kQueued;
  std::string submitted_at;
  std::optional<std::string> started_at;
  std::optional<std::string> finished_at;
  std::optional<JobError> error;    // failed and timed_out only
  std::optional<std::string> report;  // succeeded only
  std::size_t attempts = 0;         // times moved to running
  bool notified = false;
};

nlohmann::json ToJson(const Job& job);
Job JobFromJson(const nlohmann::json& j);

// Job records with an append-only JSON-lines journal; every change writes
// the full job snapshot. Replaying the journal restores the latest state.
class JobStore {
 public:
  explicit JobStore(std::filesystem::path journal);

  JobStore(const JobStore&) = delete;
  JobStore& operator=(const JobStore&) = delete;

  Job Create(const std::string& dataset_id, const nlohmann::json& config);

  // Throws IllegalTransition (and NotFound for unknown ids). `error` is kept
  // for failed/timed_out, `report` for succeeded.
  Job Transition(const std::string& job_id, JobState to, std::optional<JobError> error = std::nullopt,
                 std::optional<std::string> report = std::nullopt);

  // True exactly once per job, and only after it reached a terminal state.
  bool ClaimNotification(const std::string& job_id);

  // Puts every queued or running job back to queued (after a restart).
  // Returns their ids in submission order.
  std::vector<std::string> Recover();

  // Terminal jobs only; returns false otherwise.
  bool Remove(const std::string& job_id);

  std::optional<Job> Get(const std::string& job_id) const;
  std::vector<Job> List() const;  // submission order

  const std::filesystem::path& journal() const { return journal_; }

 private:
  void Append(std::string_view event, const Job& job);

  std::filesystem::path journal_;
  mutable std::mutex mu_;
  std::ofstream out_;
  std::map<std::string, Job> jobs_;
  std::vector<std::string> order_;
};

}  // namespace tabml::service

#endif  // TABML_SERVICE_JOB_STORE_HPP_

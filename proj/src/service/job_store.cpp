#include "tabml/service/job_store.hpp"

#include <algorithm>
#include <random>

#include "tabml/core/error.hpp"
#include "tabml/visual/log.hpp"

namespace tabml::service {

namespace {

using Json = nlohmann::json;

template <typename T>
Json OrNull(const std::optional<T>& v) {
  return v ? Json(*v) : Json(nullptr);
}

std::string NewJobId() {
  static std::mutex mu;
  static std::mt19937_64 gen{std::random_device{}()};
  std::lock_guard lock(mu);
  char buf[24];
  std::snprintf(buf, sizeof(buf), "job_%016llx", static_cast<unsigned long long>(gen()));
  return buf;
}

}  // namespace

std::string_view JobStateName(JobState state) {
  switch (state) {
    case JobState::kQueued:
      return "queued";
    case JobState::kRunning:
      return "running";
    case JobState::kSucceeded:
      return "succeeded";
    case JobState::kFailed:
      return "failed";
    case JobState::kTimedOut:
      return "timed_out";
  }
  return "queued";
}

std::optional<JobState> ParseJobState(std::string_view name) {
  for (auto s : {JobState::kQueued, JobState::kRunning, JobState::kSucceeded, JobState::kFailed,
                 JobState::kTimedOut}) {
    if (JobStateName(s) == name) return s;
  }
  return std::nullopt;
}

bool IsTerminal(JobState state) {
  return state == JobState::kSucceeded || state == JobState::kFailed || state == JobState::kTimedOut;
}

bool IsLegalTransition(JobState from, JobState to) {
  if (from == JobState::kQueued) return to == JobState::kRunning;
  if (from == JobState::kRunning) return IsTerminal(to);
  return false;
}

Json ToJson(const Job& job) {
  Json error = nullptr;
  if (job.error) error = {{"stage", job.error->stage}, {"code", job.error->code}, {"message", job.error->message}};
  return {{"job_id", job.job_id},
          {"dataset_id", job.dataset_id},
          {"config", job.config},
          {"state", JobStateName(job.state)},
          {"submitted_at", job.submitted_at},
          {"started_at", OrNull(job.started_at)},
          {"finished_at", OrNull(job.finished_at)},
          {"error", error},
          {"report", OrNull(job.report)},
          {"attempts", job.attempts},
          {"notified", job.notified}};
}

Job JobFromJson(const Json& j) {
  Job job;
  job.job_id = j.at("job_id").get<std::string>();
  job.dataset_id = j.at("dataset_id").get<std::string>();
  job.config = j.at("config");
  const auto state = ParseJobState(j.at("state").get<std::string>());
  Require(state.has_value(), ErrorCode::kMalformedInput, "unknown job state in " + job.job_id);
  job.state = *state;
  job.submitted_at = j.at("submitted_at").get<std::string>();
  if (!j.at("started_at").is_null()) job.started_at = j["started_at"].get<std::string>();
  if (!j.at("finished_at").is_null()) job.finished_at = j["finished_at"].get<std::string>();
  if (!j.at("error").is_null()) {
    const auto& e = j["error"];
    job.error = JobError{e.at("stage").get<std::string>(), e.at("code").get<std::string>(),
                         e.at("message").get<std::string>()};
  }
  if (!j.at("report").is_null()) job.report = j["report"].get<std::string>();
  job.attempts = j.value("attempts", std::size_t{0});
  job.notified = j.value("notified", false);
  return job;
}

JobStore::JobStore(std::filesystem::path journal) : journal_(std::move(journal)) {
  if (journal_.has_parent_path()) std::filesystem::create_directories(journal_.parent_path());
  {
    std::ifstream in(journal_);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      Json entry;
      try {
        entry = Json::parse(line);
      } catch (const Json::parse_error&) {
        continue;  // torn last line after a crash
      }
      Job job = JobFromJson(entry.at("job"));
      const std::string id = job.job_id;
      if (entry.value("event", "") == "removed") {
        jobs_.erase(id);
        order_.erase(std::remove(order_.begin(), order_.end(), id), order_.end());
        continue;
      }
      if (!jobs_.count(id)) order_.push_back(id);
      jobs_[id] = std::move(job);
    }
  }
  out_.open(journal_, std::ios::app);
  Require(static_cast<bool>(out_), ErrorCode::kInternal, "cannot open job journal " + journal_.string());
}

void JobStore::Append(std::string_view event, const Job& job) {
  out_ << Json{{"event", event}, {"at", visual::NowTimestamp()}, {"job", ToJson(job)}}.dump() << '\n';
  out_.flush();
  Require(static_cast<bool>(out_), ErrorCode::kInternal, "job journal write failed");
}

Job JobStore::Create(const std::string& dataset_id, const Json& config) {
  Job job;
  job.dataset_id = dataset_id;
  job.config = config;
  job.submitted_at = visual::NowTimestamp();
  std::lock_guard lock(mu_);
  do {
    job.job_id = NewJobId();
  } while (jobs_.count(job.job_id));
  Append("created", job);
  order_.push_back(job.job_id);
  jobs_[job.job_id] = job;
  return job;
}

Job JobStore::Transition(const std::string& job_id, JobState to, std::optional<JobError> error,
                         std::optional<std::string> report) {
  std::lock_guard lock(mu_);
  auto it = jobs_.find(job_id);
  Require(it != jobs_.end(), ErrorCode::kNotFound, "unknown job " + job_id);
  Job next = it->second;
  Require(IsLegalTransition(next.state, to), ErrorCode::kIllegalTransition,
          job_id + ": " + std::string(JobStateName(next.state)) + " -> " + std::string(JobStateName(to)));
  next.state = to;
  if (to == JobState::kRunning) {
    next.started_at = visual::NowTimestamp();
    ++next.attempts;
  } else {
    next.finished_at = visual::NowTimestamp();
    next.error = to == JobState::kSucceeded ? std::nullopt : std::move(error);
    next.report = to == JobState::kSucceeded ? std::move(report) : std::nullopt;
    if (to != JobState::kSucceeded && !next.error) next.error = JobError{"", "Internal", "no error detail"};
  }
  Append(JobStateName(to), next);
  it->second = next;
  return next;
}

bool JobStore::ClaimNotification(const std::string& job_id) {
  std::lock_guard lock(mu_);
  auto it = jobs_.find(job_id);
  if (it == jobs_.end() || !IsTerminal(it->second.state) || it->second.notified) return false;
  Job next = it->second;
  next.notified = true;
  Append("notified", next);
  it->second = next;
  return true;
}

std::vector<std::string> JobStore::Recover() {
  std::lock_guard lock(mu_);
  std::vector<std::string> out;
  for (const auto& id : order_) {
    Job& job = jobs_.at(id);
    if (IsTerminal(job.state)) continue;
    if (job.state == JobState::kRunning) {
      Job next = job;
      next.state = JobState::kQueued;
      next.started_at.reset();
      Append("recovered", next);
      job = next;
    }
    out.push_back(id);
  }
  return out;
}

bool JobStore::Remove(const std::string& job_id) {
  std::lock_guard lock(mu_);
  auto it = jobs_.find(job_id);
  if (it == jobs_.end() || !IsTerminal(it->second.state)) return false;
  Append("removed", it->second);
  jobs_.erase(it);
  order_.erase(std::remove(order_.begin(), order_.end(), job_id), order_.end());
  return true;
}

std::optional<Job> JobStore::Get(const std::string& job_id) const {
  std::lock_guard lock(mu_);
  auto it = jobs_.find(job_id);
  if (it == jobs_.end()) return std::nullopt;
  return it->second;
}

std::vector<Job> JobStore::List() const {
  std::lock_guard lock(mu_);
  std::vector<Job> out;
  for (const auto& id : order_) out.push_back(jobs_.at(id));
  return out;
}

}  // namespace tabml::service

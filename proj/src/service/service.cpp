#include "tabml/service/service.hpp"

#include "tabml/core/error.hpp"
#include "tabml/data/table.hpp"
#include "tabml/pipeline/run.hpp"
#include "tabml/visual/log.hpp"
#include "tabml/visual/report.hpp"

namespace tabml::service {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kStageJob = "job";
constexpr std::string_view kStageReport = "report";

}  // namespace

std::string ReportLink(const std::string& job_id) { return "/api/v1/jobs/" + job_id + "/report"; }

JobService::JobService(ServiceOptions options)
    : options_(std::move(options)),
      datasets_(options_.data_root / "datasets"),
      jobs_(options_.data_root / "jobs.jsonl"),
      notifier_(NotifierOptions{options_.data_root / "outbox", options_.webhook_backoff_seconds, 5.0}) {
  if (options_.demo_dataset) datasets_.AddFile("demo", *options_.demo_dataset);
}

JobService::~JobService() { Stop(); }

void JobService::Start() {
  for (const auto& id : jobs_.Recover()) Enqueue(id);
  std::lock_guard lock(queue_mu_);
  stopping_ = false;
  for (std::size_t i = workers_.size(); i < std::max<std::size_t>(1, options_.workers); ++i) {
    workers_.emplace_back([this] { WorkerLoop(); });
  }
}

void JobService::Stop() {
  {
    std::lock_guard lock(queue_mu_);
    stopping_ = true;
  }
  queue_cv_.notify_all();
  for (auto& t : workers_) {
    if (t.joinable()) t.join();
  }
  workers_.clear();
}

void JobService::Enqueue(const std::string& job_id) {
  {
    std::lock_guard lock(queue_mu_);
    queue_.push_back(job_id);
  }
  queue_cv_.notify_one();
}

void JobService::WorkerLoop() {
  while (true) {
    std::string id;
    {
      std::unique_lock lock(queue_mu_);
      queue_cv_.wait(lock, [&] { return stopping_ || !queue_.empty(); });
      if (stopping_) return;
      id = std::move(queue_.front());
      queue_.pop_front();
    }
    RunJob(id);
  }
}

Submission JobService::Submit(const nlohmann::json& config_doc) {
  Submission out;
  const pipeline::ConfigParse parsed = pipeline::ParseRunConfig(config_doc);
  if (!parsed.config) {
    out.errors = parsed.errors;
    return out;
  }
  const auto dataset = datasets_.Get(parsed.config->dataset_id);
  if (!dataset) {
    out.dataset_missing = true;
    return out;
  }
  out.errors = pipeline::CheckColumns(*parsed.config, dataset->schema);
  if (!out.errors.empty()) return out;
  out.job = jobs_.Create(dataset->dataset_id, pipeline::ToJson(*parsed.config));
  Enqueue(out.job->job_id);
  return out;
}

fs::path JobService::JobDir(const std::string& job_id) const { return options_.data_root / "jobs" / job_id; }

void JobService::RunJob(const std::string& job_id) {
  const auto queued = jobs_.Get(job_id);
  if (!queued || queued->state != JobState::kQueued) return;
  const fs::path dir = JobDir(job_id);
  std::error_code ec;
  fs::remove_all(dir, ec);  // leftovers of an interrupted attempt
  fs::create_directories(dir, ec);
  Job job = jobs_.Transition(job_id, JobState::kRunning);
  visual::RunLog log(job_id, dir / "log.jsonl");
  log.Info(kStageJob, "attempt " + std::to_string(job.attempts) + " started");

  std::optional<pipeline::RunConfig> config;
  try {
    config = pipeline::RunConfigFromJson(job.config);
    const data::RawTable table = datasets_.Load(job.dataset_id);
    pipeline::RunOptions run_options;
    run_options.run_id = job_id;
    run_options.model_timeout_seconds = options_.model_timeout_seconds;
    const pipeline::RunResult result = pipeline::RunPipeline(*config, table, log, run_options);
    const visual::Report report = visual::RenderReport(result, "log.jsonl");
    const auto files = visual::WriteReport(report, result, dir);
    log.Info(kStageReport, "report written with " + std::to_string(files.plots.size()) + " plots");
    job = jobs_.Transition(job_id, JobState::kSucceeded, std::nullopt, ReportLink(job_id));
  } catch (const pipeline::StageError& e) {
    const JobState state = e.code() == ErrorCode::kTimedOut ? JobState::kTimedOut : JobState::kFailed;
    job = jobs_.Transition(job_id, state, JobError{e.stage(), std::string(e.code_name()), e.detail()});
  } catch (const Error& e) {
    log.Error(kStageJob, e.what());
    job = jobs_.Transition(job_id, JobState::kFailed, JobError{std::string(kStageJob), std::string(e.code_name()), e.what()});
  } catch (const std::exception& e) {
    log.Error(kStageJob, e.what());
    job = jobs_.Transition(job_id, JobState::kFailed, JobError{std::string(kStageJob), "Internal", e.what()});
  }
  log.Info(kStageJob, "finished: " + std::string(JobStateName(job.state)));

  if (config && config->notify && jobs_.ClaimNotification(job_id)) {
    notifier_.Deliver(*config->notify, *jobs_.Get(job_id), log);
  }
}

std::optional<Job> JobService::WaitForTerminal(const std::string& job_id, std::chrono::duration<double> timeout) const {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  while (true) {
    auto job = jobs_.Get(job_id);
    if (!job) return std::nullopt;
    if (IsTerminal(job->state)) return job;
    if (std::chrono::steady_clock::now() >= deadline) return std::nullopt;
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
}

}  // namespace tabml::service

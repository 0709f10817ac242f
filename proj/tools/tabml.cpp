#include <chrono>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "tabml/core/error.hpp"
#include "tabml/core/version.hpp"
#include "tabml/data/schema.hpp"
#include "tabml/data/table.hpp"
#include "tabml/pipeline/run.hpp"
#include "tabml/service/http.hpp"
#include "tabml/service/service.hpp"
#include "tabml/visual/log.hpp"
#include "tabml/visual/report.hpp"

namespace fs = std::filesystem;
using namespace tabml;

namespace {

service::HttpServer* g_server = nullptr;

void OnSignal(int) {
  if (g_server) g_server->Stop();
}

nlohmann::json ReadJson(const fs::path& path) {
  std::ifstream f(path);
  Require(static_cast<bool>(f), ErrorCode::kFileNotFound, "cannot open " + path.string());
  try {
    return nlohmann::json::parse(f);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kMalformedInput, path.string() + ": " + e.what());
  }
}

int Run(const fs::path& config_path, const fs::path& data_path, const fs::path& out_dir, const std::string& run_id,
        double timeout) {
  const pipeline::RunConfig config = pipeline::RunConfigFromJson(ReadJson(config_path));
  const data::RawTable table = data::ReadTable(data_path);
  fs::create_directories(out_dir);
  fs::remove(out_dir / "log.jsonl");
  visual::RunLog log(run_id, out_dir / "log.jsonl");
  pipeline::RunOptions options;
  options.run_id = run_id;
  options.model_timeout_seconds = timeout;
  const pipeline::RunResult result = pipeline::RunPipeline(config, table, log, options);
  const auto files = visual::WriteReport(visual::RenderReport(result, "log.jsonl"), result, out_dir);

  for (const auto& m : result.models) {
    std::cout << m.spec.name() << "\t" << pipeline::ModelStatusName(m.status);
    if (m.metrics) std::cout << "\t" << m.metrics->primary();
    std::cout << "\n";
  }
  for (const auto& c : result.clusters) {
    std::cout << unsupervised::ClusterAlgorithmName(c.spec.algorithm) << "\t" << pipeline::ModelStatusName(c.status);
    if (c.silhouette) std::cout << "\tsilhouette " << *c.silhouette;
    std::cout << "\n";
  }
  if (result.winner) std::cout << "winner: " << result.models[*result.winner].spec.name() << "\n";
  std::cout << "report: " << files.report.string() << "\n";
  return 0;
}

int Cleanup(const fs::path& data_root, double older_than_days, bool dry_run) {
  service::JobStore jobs(data_root / "jobs.jsonl");
  const auto cutoff = visual::FormatTimestamp(
      std::chrono::system_clock::now() -
      std::chrono::duration_cast<std::chrono::system_clock::duration>(std::chrono::duration<double>(older_than_days * 86400.0)));
  std::size_t removed = 0;
  for (const auto& job : jobs.List()) {
    if (!service::IsTerminal(job.state) || !job.finished_at || *job.finished_at > cutoff) continue;
    std::cout << (dry_run ? "would remove " : "removed ") << job.job_id << " (" << service::JobStateName(job.state)
              << ", finished " << *job.finished_at << ")\n";
    ++removed;
    if (dry_run) continue;
    jobs.Remove(job.job_id);
    std::error_code ec;
    fs::remove_all(data_root / "jobs" / job.job_id, ec);
    fs::remove(data_root / "outbox" / (job.job_id + ".json"), ec);
  }
  std::cout << removed << " job(s)" << (dry_run ? " eligible" : " removed") << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tabml: tabular machine learning pipeline and job service"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run one pipeline locally and write the report");
  fs::path config_path, data_path, out_dir = "tabml-run";
  std::string run_id = "run";
  double run_timeout = 120.0;
  run->add_option("-c,--config", config_path, "RunConfig JSON file")->required()->check(CLI::ExistingFile);
  run->add_option("-d,--data", data_path, "CSV/TSV file or directory of files")->required()->check(CLI::ExistingPath);
  run->add_option("-o,--out", out_dir, "Output directory")->capture_default_str();
  run->add_option("--run-id", run_id, "Run id recorded in the report and log")->capture_default_str();
  run->add_option("--model-timeout-seconds", run_timeout, "Wall-time budget per model")->capture_default_str();

  auto* serve = app.add_subcommand("serve", "Start the HTTP job service");
  service::ServiceOptions options;
  std::string host = "0.0.0.0";
  int port = 8080;
  std::optional<fs::path> static_dir;
  double max_upload_mb = 100.0;
  serve->add_option("--port", port, "Listen port")->envname("TABML_PORT")->capture_default_str();
  serve->add_option("--host", host, "Listen address")->envname("TABML_HOST")->capture_default_str();
  serve->add_option("--data-root", options.data_root, "Datasets, jobs and reports")
      ->envname("TABML_DATA_ROOT")
      ->capture_default_str();
  serve->add_option("--workers", options.workers, "Concurrent jobs")
      ->envname("TABML_WORKERS")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  serve->add_option("--model-timeout-seconds", options.model_timeout_seconds, "Wall-time budget per model")
      ->envname("TABML_MODEL_TIMEOUT_SECONDS")
      ->capture_default_str();
  serve->add_option("--max-upload-mb", max_upload_mb, "Upload size limit")->envname("TABML_MAX_UPLOAD_MB")->capture_default_str();
  serve->add_option("--static-dir", static_dir, "UI bundle served at /")->envname("TABML_STATIC_DIR");
  serve->add_option("--demo", options.demo_dataset, "CSV registered as dataset 'demo'")->check(CLI::ExistingFile);

  auto* schema = app.add_subcommand("schema", "Print the inferred schema of a table");
  fs::path schema_path;
  schema->add_option("file", schema_path, "CSV/TSV file or directory")->required()->check(CLI::ExistingPath);

  auto* cleanup = app.add_subcommand("cleanup", "Remove finished jobs and their files (service stopped)");
  fs::path cleanup_root = "tabml-data";
  double older_than_days = 0.0;
  bool dry_run = false;
  cleanup->add_option("--data-root", cleanup_root, "Service data root")->envname("TABML_DATA_ROOT")->capture_default_str();
  cleanup->add_option("--older-than-days", older_than_days, "Only jobs finished before this age")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  cleanup->add_flag("--dry-run", dry_run, "List without deleting");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return Run(config_path, data_path, out_dir, run_id, run_timeout);
    if (*schema) {
      std::cout << data::ToJson(data::InferSchema(data::ReadTable(schema_path))).dump(2) << "\n";
      return 0;
    }
    if (*cleanup) return Cleanup(cleanup_root, older_than_days, dry_run);
    if (*serve) {
      options.max_upload_bytes = static_cast<std::size_t>(max_upload_mb * 1024.0 * 1024.0);
      service::JobService svc(options);
      service::HttpServer server(svc, static_dir);
      g_server = &server;
      std::signal(SIGINT, OnSignal);
      std::signal(SIGTERM, OnSignal);
      svc.Start();
      std::cerr << "tabml " << kVersion << " listening on " << host << ":" << port << ", data root "
                << options.data_root.string() << "\n";
      const bool ok = server.Listen(host, port);
      g_server = nullptr;
      svc.Stop();
      if (!ok) {
        std::cerr << "error: cannot listen on " << host << ":" << port << "\n";
        return 1;
      }
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error [" << e.code_name() << "]: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

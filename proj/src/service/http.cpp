#include "tabml/service/http.hpp"

#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>

#include "tabml/core/error.hpp"
#include "tabml/core/version.hpp"
#include "tabml/models/catalog.hpp"
#include "tabml/preprocess/scaler.hpp"
#include "tabml/unsupervised/cluster.hpp"
#include "tabml/visual/plot.hpp"

namespace tabml::service {

namespace {

using Json = nlohmann::json;
using httplib::Request;
using httplib::Response;

constexpr const char* kJson = "application/json";

void SendJson(Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(body.dump(), kJson);
}

void SendError(Response& res, int status, std::string_view code, const std::string& message,
               const Json& extra = Json::object()) {
  Json error = {{"code", code}, {"message", message}};
  error.update(extra);
  SendJson(res, status, {{"error", error}});
}

int StatusFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotFound:
      return 404;
    case ErrorCode::kInternal:
      return 500;
    default:
      return 400;
  }
}

std::optional<std::string> ReadFile(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) return std::nullopt;
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

Json FieldErrors(const std::vector<pipeline::FieldError>& errors) {
  Json out = Json::array();
  for (const auto& e : errors) out.push_back(pipeline::ToJson(e));
  return out;
}

Json CatalogJson() {
  auto names = [](models::Task task) {
    Json out = Json::array();
    for (auto a : models::DefaultAlgorithms(task)) out.push_back(models::AlgorithmName(a));
    return out;
  };
  Json clusters = Json::array();
  for (auto a : {unsupervised::ClusterAlgorithm::kKmeans, unsupervised::ClusterAlgorithm::kDbscan,
                 unsupervised::ClusterAlgorithm::kAgglomerative, unsupervised::ClusterAlgorithm::kGmm}) {
    clusters.push_back(unsupervised::ClusterAlgorithmName(a));
  }
  Json scalers = Json::array({"auto", "none"});
  for (auto m : {preprocess::ScalerMethod::kStandard, preprocess::ScalerMethod::kRobust,
                 preprocess::ScalerMethod::kUnitNorm, preprocess::ScalerMethod::kPower,
                 preprocess::ScalerMethod::kQuantile}) {
    scalers.push_back(preprocess::ScalerMethodName(m));
  }
  Json oversample = Json::array();
  for (auto o : {pipeline::OversampleChoice::kAuto, pipeline::OversampleChoice::kNone,
                 pipeline::OversampleChoice::kRandom, pipeline::OversampleChoice::kSmote}) {
    oversample.push_back(pipeline::OversampleChoiceName(o));
  }
  return {{"models",
           {{"classification", names(models::Task::kClassification)},
            {"regression", names(models::Task::kRegression)},
            {"unsupervised", clusters}}},
          {"scalers", scalers},
          {"oversample", oversample},
          {"notify_modes", {"file", "webhook"}}};
}

constexpr const char* kFallbackIndex =
    "<!doctype html><html><head><meta charset=\"utf-8\"><title>tabml</title></head><body>"
    "<h1>tabml service</h1><p>The UI bundle is not installed. The JSON API is served under "
    "<code>/api/v1</code>.</p></body></html>";

}  // namespace

HttpServer::HttpServer(JobService& service, std::optional<std::filesystem::path> static_dir)
    : service_(service), static_dir_(std::move(static_dir)), server_(std::make_unique<httplib::Server>()) {
  Routes();
}

HttpServer::~HttpServer() { Stop(); }

void HttpServer::Routes() {
  auto& s = *server_;
  // Headers and multipart framing add a little on top of the file itself.
  s.set_payload_max_length(service_.options().max_upload_bytes + 64 * 1024);

  s.set_exception_handler([](const Request&, Response& res, std::exception_ptr ep) {
    try {
      std::rethrow_exception(ep);
    } catch (const Error& e) {
      SendError(res, StatusFor(e.code()), e.code_name(), e.what());
    } catch (const std::exception& e) {
      SendError(res, 500, "Internal", e.what());
    }
  });

  s.Get("/api/v1/health", [](const Request&, Response& res) {
    SendJson(res, 200, {{"status", "ok"}, {"version", kVersion}});
  });

  s.Get("/api/v1/catalog", [](const Request&, Response& res) { SendJson(res, 200, CatalogJson()); });

  s.Post("/api/v1/datasets", [this](const Request& req, Response& res) {
    std::string filename;
    std::string content;
    if (req.is_multipart_form_data()) {
      if (!req.has_file("file")) {
        SendError(res, 400, "MalformedInput", "multipart field 'file' is required");
        return;
      }
      const auto file = req.get_file_value("file");
      filename = file.filename.empty() ? "upload.csv" : file.filename;
      content = file.content;
    } else {
      filename = req.has_param("filename") ? req.get_param_value("filename") : "upload.csv";
      content = req.body;
    }
    if (content.size() > service_.options().max_upload_bytes) {
      SendError(res, 413, "PayloadTooLarge",
                "file exceeds " + std::to_string(service_.options().max_upload_bytes) + " bytes");
      return;
    }
    try {
      SendJson(res, 201, ToJson(service_.datasets().Add(filename, content)));
    } catch (const Error& e) {
      SendError(res, e.code() == ErrorCode::kInternal ? 500 : 400, e.code_name(), e.what());
    }
  });

  s.Get("/api/v1/datasets", [this](const Request&, Response& res) {
    Json out = Json::array();
    for (const auto& d : service_.datasets().List()) out.push_back(ToJson(d));
    SendJson(res, 200, {{"datasets", out}});
  });

  s.Get("/api/v1/datasets/:id", [this](const Request& req, Response& res) {
    const auto d = service_.datasets().Get(req.path_params.at("id"));
    if (!d) return SendError(res, 404, "NotFound", "unknown dataset " + req.path_params.at("id"));
    SendJson(res, 200, ToJson(*d));
  });

  s.Get("/api/v1/datasets/:id/schema", [this](const Request& req, Response& res) {
    const auto d = service_.datasets().Get(req.path_params.at("id"));
    if (!d) return SendError(res, 404, "NotFound", "unknown dataset " + req.path_params.at("id"));
    SendJson(res, 200, data::ToJson(d->schema));
  });

  s.Post("/api/v1/config/validate", [this](const Request& req, Response& res) {
    Json doc;
    try {
      doc = Json::parse(req.body);
    } catch (const Json::parse_error& e) {
      return SendError(res, 400, "MalformedInput", e.what());
    }
    const auto parsed = pipeline::ParseRunConfig(doc);
    std::vector<pipeline::FieldError> errors = parsed.errors;
    if (parsed.config) {
      if (const auto d = service_.datasets().Get(parsed.config->dataset_id)) {
        errors = pipeline::CheckColumns(*parsed.config, d->schema);
      } else {
        errors.push_back({"dataset_id", "unknown dataset " + parsed.config->dataset_id});
      }
    }
    Json out = {{"valid", errors.empty()}, {"fields", FieldErrors(errors)}};
    if (errors.empty()) out["config"] = pipeline::ToJson(*parsed.config);
    SendJson(res, 200, out);
  });

  s.Post("/api/v1/jobs", [this](const Request& req, Response& res) {
    Json doc;
    try {
      doc = Json::parse(req.body);
    } catch (const Json::parse_error& e) {
      return SendError(res, 400, "MalformedInput", e.what());
    }
    const Submission sub = service_.Submit(doc);
    if (sub.dataset_missing) {
      return SendError(res, 404, "NotFound", "unknown dataset " + doc.value("dataset_id", std::string()));
    }
    if (!sub.job) {
      std::string message;
      for (const auto& e : sub.errors) message += (message.empty() ? "" : "; ") + e.field + ": " + e.message;
      return SendError(res, 400, "InvalidConfig", message, {{"fields", FieldErrors(sub.errors)}});
    }
    res.set_header("Location", "/api/v1/jobs/" + sub.job->job_id);
    SendJson(res, 202, ToJson(*sub.job));
  });

  s.Get("/api/v1/jobs", [this](const Request&, Response& res) {
    Json out = Json::array();
    for (const auto& j : service_.jobs().List()) out.push_back(ToJson(j));
    SendJson(res, 200, {{"jobs", out}});
  });

  auto with_job = [this](auto handler) {
    return [this, handler](const Request& req, Response& res) {
      const auto job = service_.jobs().Get(req.path_params.at("id"));
      if (!job) return SendError(res, 404, "NotFound", "unknown job " + req.path_params.at("id"));
      handler(req, res, *job);
    };
  };
  auto not_ready = [](Response& res, const Job& job) {
    SendError(res, 409, "NotReady", "job " + job.job_id + " is " + std::string(JobStateName(job.state)),
              {{"state", JobStateName(job.state)}});
  };

  s.Get("/api/v1/jobs/:id", with_job([](const Request&, Response& res, const Job& job) {
          SendJson(res, 200, ToJson(job));
        }));

  s.Get("/api/v1/jobs/:id/report", with_job([this, not_ready](const Request&, Response& res, const Job& job) {
          if (job.state != JobState::kSucceeded) return not_ready(res, job);
          const auto body = ReadFile(service_.JobDir(job.job_id) / "report.json");
          if (!body) return SendError(res, 500, "Internal", "report file missing for " + job.job_id);
          res.set_content(*body, kJson);
        }));

  s.Get("/api/v1/jobs/:id/log", with_job([this](const Request&, Response& res, const Job& job) {
          res.set_content(ReadFile(service_.LogPath(job.job_id)).value_or(""), "application/x-ndjson");
        }));

  s.Get("/api/v1/jobs/:id/model", with_job([this, not_ready](const Request&, Response& res, const Job& job) {
          if (job.state != JobState::kSucceeded) return not_ready(res, job);
          const auto body = ReadFile(service_.JobDir(job.job_id) / "model.json");
          if (!body) return SendError(res, 404, "NotFound", "job " + job.job_id + " has no trained model");
          res.set_header("Content-Disposition", "attachment; filename=\"" + job.job_id + "-model.json\"");
          res.set_content(*body, kJson);
        }));

  s.Get("/api/v1/jobs/:id/plots/:kind", with_job([this, not_ready](const Request& req, Response& res, const Job& job) {
          if (job.state != JobState::kSucceeded) return not_ready(res, job);
          std::string kind = req.path_params.at("kind");
          if (kind.size() > 4 && kind.compare(kind.size() - 4, 4, ".svg") == 0) kind.resize(kind.size() - 4);
          bool known = false;
          for (int k = 0; k <= static_cast<int>(visual::PlotKind::kLossCurve); ++k) {
            known |= visual::PlotKindName(static_cast<visual::PlotKind>(k)) == kind;
          }
          const auto body = known ? ReadFile(service_.JobDir(job.job_id) / "plots" / (kind + ".svg")) : std::nullopt;
          if (!body) return SendError(res, 404, "NotFound", "no plot '" + kind + "' for job " + job.job_id);
          res.set_content(*body, "image/svg+xml");
        }));

  if (static_dir_ && std::filesystem::is_directory(*static_dir_)) {
    s.set_mount_point("/", static_dir_->string());
  } else {
    s.Get("/", [](const Request&, Response& res) { res.set_content(kFallbackIndex, "text/html"); });
  }
}

bool HttpServer::Listen(const std::string& host, int port) { return server_->listen(host, port); }

int HttpServer::StartInBackground(const std::string& host) {
  const int port = server_->bind_to_any_port(host);
  Require(port > 0, ErrorCode::kInternal, "cannot bind " + host);
  thread_ = std::make_unique<std::thread>([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return port;
}

void HttpServer::Stop() {
  if (server_) server_->stop();
  if (thread_ && thread_->joinable()) thread_->join();
  thread_.reset();
}

}  // namespace tabml::service

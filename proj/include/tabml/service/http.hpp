#ifndef TABML_SERVICE_HTTP_HPP_
#define TABML_SERVICE_HTTP_HPP_

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <thread>

#include "tabml/service/service.hpp"

namespace httplib {
class Server;
}

namespace tabml::service {

// JSON API under /api/v1 plus the static UI bundle at /.
class HttpServer {
 public:
  HttpServer(JobService& service, std::optional<std::filesystem::path> static_dir = std::nullopt);
  ~HttpServer();

  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Blocks until Stop().
  bool Listen(const std::string& host, int port);
  // Binds an ephemeral port and serves on a background thread.
  int StartInBackground(const std::string& host = "127.0.0.1");
  void Stop();

 private:
  void Routes();

  JobService& service_;
  std::optional<std::filesystem::path> static_dir_;
  std::unique_ptr<httplib::Server> server_;
  std::unique_ptr<std::thread> thread_;
};

}  // namespace tabml::service

#endif  // TABML_SERVICE_HTTP_HPP_

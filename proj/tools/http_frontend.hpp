#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

namespace httplib {
class Server;
}

namespace pipestash {
class ApiService;
}

namespace pipestash::cli {

// Binds ApiService to cpp-httplib. Static files under `ui_dir`, when given,
// are served from "/".
class HttpFrontend {
 public:
  HttpFrontend(ApiService& service,
               std::optional<std::filesystem::path> ui_dir = std::nullopt);
  ~HttpFrontend();

  HttpFrontend(const HttpFrontend&) = delete;
  HttpFrontend& operator=(const HttpFrontend&) = delete;

  /// Port 0 picks a free port. Returns the bound port or -1.
  int bind(const std::string& host, int port);
  /// Blocks until stop().
  bool listen();
  void stop();
  void wait_until_ready() const;

 private:
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace pipestash::cli

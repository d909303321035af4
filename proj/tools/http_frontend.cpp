#include "http_frontend.hpp"

#include "httplib.h"
#include "pipestash/service.hpp"

namespace pipestash::cli {

namespace {

std::string target_of(const httplib::Request& req) {
  std::string target = req.path;
  char sep = '?';
  for (const auto& [key, value] : req.params) {
    target += sep;
    target += key;
    target += '=';
    target += value;
    sep = '&';
  }
  return target;
}

}  // namespace

HttpFrontend::HttpFrontend(ApiService& service,
                           std::optional<std::filesystem::path> ui_dir)
    : server_(std::make_unique<httplib::Server>()) {
  if (ui_dir) server_->set_mount_point("/", ui_dir->string());

  auto dispatch = [&service](const httplib::Request& req, httplib::Response& res) {
    HttpResponse r = service.handle(req.method, target_of(req), req.body);
    res.status = r.status;
    res.set_content(r.body, r.content_type);
  };
  server_->Get(".*", dispatch);
  server_->Post(".*", dispatch);
  server_->Put(".*", dispatch);
  server_->Delete(".*", dispatch);
}

HttpFrontend::~HttpFrontend() = default;

int HttpFrontend::bind(const std::string& host, int port) {
  if (port == 0) return server_->bind_to_any_port(host);
  return server_->bind_to_port(host, port) ? port : -1;
}

bool HttpFrontend::listen() { return server_->listen_after_bind(); }

void HttpFrontend::stop() { server_->stop(); }

void HttpFrontend::wait_until_ready() const { server_->wait_until_ready(); }

}  // namespace pipestash::cli

#pragma once

#include <memory>
#include <string>

#include "gridt/server/service.hpp"

namespace httplib {
class Server;
}

namespace gridt::server {

/// The /v1 JSON API over cpp-httplib.
///
///   POST /v1/networks                  operator   {k, game_spec, config}
///   POST /v1/networks/{id}/join                   {profile, link_request}
///   GET  /v1/networks/{id}/view        session    ?wait=true&known=<etag>
///   POST /v1/networks/{id}/signal      session    {message?}
///   POST /v1/networks/{id}/message     session    {message}
///   POST /v1/networks/{id}/rewire      session    {drop_user_id, add}
///   POST /v1/networks/{id}/leave       session
///   GET  /v1/networks/{id}/public
///   GET  /v1/networks/{id}/events      operator   ?since=<seq>&limit=<n>
///   POST /v1/networks/{id}/reset       operator
///   POST /v1/networks/{id}/tick        operator
///   GET  /v1/health
///
/// Errors are {"error": {"code", "message"}} with the matching status.
class HttpServer {
 public:
  HttpServer(Service& service, int threads = 64);
  ~HttpServer();

  /// Binds; port 0 picks a free port. Returns the bound port or -1.
  int bind(const std::string& host, int port);
  /// Serves until stop(). Blocks.
  bool run();
  void stop();

 private:
  void routes();

  Service& service_;
  std::unique_ptr<httplib::Server> http_;
};

}  // namespace gridt::server

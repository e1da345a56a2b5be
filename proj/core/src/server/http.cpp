#include "gridt/server/http.hpp"

#include <httplib.h>

#include <charconv>

namespace gridt::server {
namespace {

using json = nlohmann::json;

void send(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, const ApiError& e) {
  send(res, e.status(), {{"error", {{"code", e.code()}, {"message", e.what()}}}});
}

template <class Fn>
void guarded(httplib::Response& res, Fn&& fn) {
  try {
    fn();
  } catch (const ApiError& e) {
    send_error(res, e);
  } catch (const ProtocolError& e) {
    send_error(res, ApiError::from(e));
  } catch (const json::exception& e) {
    send_error(res, ApiError::invalid(std::string("malformed request: ") + e.what()));
  } catch (const std::invalid_argument& e) {
    send_error(res, ApiError::invalid(e.what()));
  } catch (const std::exception& e) {
    send_error(res, ApiError("INTERNAL", 500, e.what()));
  }
}

json body_of(const httplib::Request& req, bool optional = false) {
  if (req.body.empty()) {
    if (optional) return json::object();
    throw ApiError::invalid("request body required");
  }
  try {
    return json::parse(req.body);
  } catch (const json::parse_error&) {
    throw ApiError::invalid("malformed JSON body");
  }
}

std::uint64_t query_uint(const httplib::Request& req, const char* key, std::uint64_t fallback) {
  if (!req.has_param(key)) return fallback;
  const auto v = req.get_param_value(key);
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) throw ApiError::invalid(std::string(key) + " must be an integer");
  return out;
}

std::string auth(const httplib::Request& req) { return req.get_header_value("Authorization"); }

json reset_json(const ResetOutcome& r) {
  json j = {{"fired", r.fired}, {"reason", nullptr}, {"departed", r.departed}, {"repaired", r.repaired}};
  if (r.reason) j["reason"] = std::string(to_string(*r.reason));
  return j;
}

}  // namespace

HttpServer::HttpServer(Service& service, int threads) : service_(service), http_(std::make_unique<httplib::Server>()) {
  const auto n = static_cast<std::size_t>(std::max(1, threads));
  http_->new_task_queue = [n] { return new httplib::ThreadPool(n); };
  const auto poll = static_cast<time_t>(service.options().long_poll_seconds) + 5;
  http_->set_read_timeout(poll, 0);
  http_->set_write_timeout(poll, 0);
  routes();
}

HttpServer::~HttpServer() = default;

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) return http_->bind_to_any_port(host);
  return http_->bind_to_port(host, port) ? port : -1;
}

bool HttpServer::run() { return http_->listen_after_bind(); }

void HttpServer::stop() {
  service_.stop();
  http_->stop();
}

void HttpServer::routes() {
  auto& s = service_;
  const std::string net = R"(/v1/networks/([^/]+))";

  http_->Get("/v1/health", [](const httplib::Request&, httplib::Response& res) { send(res, 200, {{"ok", true}}); });

  http_->Post("/v1/networks", [&s](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      s.require_operator(auth(req));
      send(res, 201, {{"network_id", s.create_network(body_of(req))}});
    });
  });

  http_->Post(net + "/join", [&s](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const auto r = s.join(req.matches[1], body_of(req));
      send(res, 201, {{"user_id", r.user_id.str()}, {"private_id", r.private_id}, {"session_token", r.session_token}});
    });
  });

  http_->Get(net + "/view", [&s](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const auto session = s.authenticate(req.matches[1], auth(req));
      if (req.get_param_value("wait") == "true") {
        const auto timeout = std::chrono::milliseconds(static_cast<long>(s.options().long_poll_seconds * 1000));
        auto [view, tag] = s.wait_view(session, req.get_param_value("known"), timeout);
        res.set_header("ETag", tag);
        send(res, 200, to_json(view));
      } else {
        const auto view = s.view(session);
        res.set_header("ETag", view_etag(view));
        send(res, 200, to_json(view));
      }
    });
  });

  http_->Post(net + "/signal", [&s](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const auto session = s.authenticate(req.matches[1], auth(req));
      const auto body = body_of(req, true);
      std::optional<std::string> message;
      if (auto it = body.find("message"); it != body.end() && !it->is_null()) message = it->get<std::string>();
      send(res, 200, to_json(s.signal(session, message)));
    });
  });

  http_->Post(net + "/message", [&s](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const auto session = s.authenticate(req.matches[1], auth(req));
      send(res, 200, to_json(s.set_message(session, body_of(req).at("message").get<std::string>())));
    });
  });

  http_->Post(net + "/rewire", [&s](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const auto session = s.authenticate(req.matches[1], auth(req));
      send(res, 200, to_json(s.rewire(session, body_of(req))));
    });
  });

  http_->Post(net + "/leave", [&s](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const auto session = s.authenticate(req.matches[1], auth(req));
      s.leave(session);
      send(res, 200, {{"ok", true}});
    });
  });

  http_->Get(net + "/public", [&s](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { send(res, 200, s.public_info(req.matches[1])); });
  });

  http_->Get(net + "/events", [&s](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      s.require_operator(auth(req));
      const auto limit = query_uint(req, "limit", 1000);
      if (limit < 1 || limit > 100000) throw ApiError::invalid("limit must be in [1, 100000]");
      send(res, 200, s.events(req.matches[1], query_uint(req, "since", 0), limit));
    });
  });

  http_->Post(net + "/reset", [&s](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      s.require_operator(auth(req));
      send(res, 200, reset_json(s.trigger_reset(req.matches[1])));
    });
  });

  http_->Post(net + "/tick", [&s](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      s.require_operator(auth(req));
      send(res, 200, reset_json(s.tick(req.matches[1])));
    });
  });

  http_->set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (res.status == 404 && res.body.empty()) {
      send(res, 404, {{"error", {{"code", "NOT_FOUND"}, {"message", "no such endpoint"}}}});
    }
  });
}

}  // namespace gridt::server

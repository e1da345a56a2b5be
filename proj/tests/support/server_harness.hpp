#pragma once

// In-process and forked server fixtures plus wire-level checks.

#include <httplib.h>
#include <signal.h>
#include <stdlib.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <filesystem>
#include <memory>
#include <regex>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "gridt/protocol/network.hpp"
#include "gridt/server/http.hpp"
#include "gridt/server/service.hpp"

namespace gridt::testing {

using json = nlohmann::json;

class TempDir {
 public:
  TempDir() {
    std::string pattern = (std::filesystem::temp_directory_path() / "gridt-XXXXXX").string();
    if (!::mkdtemp(pattern.data())) throw std::runtime_error("mkdtemp failed");
    path_ = pattern;
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

inline server::ServiceOptions options_for(const std::string& dir, double long_poll = 2.0) {
  server::ServiceOptions o;
  o.data_dir = dir;
  o.operator_token = "operator-secret";
  o.long_poll_seconds = long_poll;
  return o;
}

inline bool wait_healthy(int port, std::chrono::milliseconds budget = std::chrono::seconds(10)) {
  const auto until = std::chrono::steady_clock::now() + budget;
  while (std::chrono::steady_clock::now() < until) {
    httplib::Client c("127.0.0.1", port);
    c.set_connection_timeout(0, 200000);
    if (auto r = c.Get("/v1/health"); r && r->status == 200) return true;
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
  return false;
}

/// Service plus HTTP listener on an ephemeral port, served from a thread.
class LiveServer {
 public:
  explicit LiveServer(const std::string& dir, double long_poll = 2.0)
      : service_(std::make_unique<server::Service>(options_for(dir, long_poll))) {
    recovery_ = service_->recover();
    http_ = std::make_unique<server::HttpServer>(*service_, 48);
    port_ = http_->bind("127.0.0.1", 0);
    if (port_ <= 0) throw std::runtime_error("bind failed");
    thread_ = std::thread([this] { http_->run(); });
    if (!wait_healthy(port_)) throw std::runtime_error("server did not come up");
  }
  ~LiveServer() {
    http_->stop();
    thread_.join();
  }

  int port() const { return port_; }
  server::Service& service() { return *service_; }
  const server::RecoveryReport& recovery() const { return recovery_; }

 private:
  std::unique_ptr<server::Service> service_;
  std::unique_ptr<server::HttpServer> http_;
  server::RecoveryReport recovery_;
  std::thread thread_;
  int port_ = 0;
};

/// A server in a child process, for crash tests. The child never returns.
class ForkedServer {
 public:
  explicit ForkedServer(const std::string& dir) {
    int fds[2];
    if (::pipe(fds) != 0) throw std::runtime_error("pipe failed");
    pid_ = ::fork();
    if (pid_ < 0) throw std::runtime_error("fork failed");
    if (pid_ == 0) {
      ::close(fds[0]);
      int port = -1;
      try {
        server::Service service(options_for(dir));
        service.recover();
        server::HttpServer http(service, 48);
        port = http.bind("127.0.0.1", 0);
        if (::write(fds[1], &port, sizeof port) != sizeof port) ::_exit(3);
        http.run();
      } catch (...) {
        [[maybe_unused]] auto ignored = ::write(fds[1], &port, sizeof port);
      }
      ::_exit(2);
    }
    ::close(fds[1]);
    if (::read(fds[0], &port_, sizeof port_) != sizeof port_ || port_ <= 0) {
      ::close(fds[0]);
      kill();
      throw std::runtime_error("child server failed to start");
    }
    ::close(fds[0]);
    if (!wait_healthy(port_)) {
      kill();
      throw std::runtime_error("child server not healthy");
    }
  }
  ~ForkedServer() { kill(); }

  void kill() {
    if (pid_ <= 0) return;
    ::kill(pid_, SIGKILL);
    int status = 0;
    ::waitpid(pid_, &status, 0);
    pid_ = -1;
  }
  int port() const { return port_; }

 private:
  pid_t pid_ = -1;
  int port_ = -1;
};

struct Reply {
  int status = 0;  // 0: no response (connection failure)
  json body;
  std::string etag;
};

/// Thin JSON client for the /v1 API.
class Api {
 public:
  explicit Api(int port) : client_("127.0.0.1", port) {
    client_.set_connection_timeout(2, 0);
    client_.set_read_timeout(40, 0);
    client_.set_keep_alive(true);
  }

  Reply get(const std::string& path, const std::string& token = {}) {
    return wrap(client_.Get(path, headers(token)));
  }
  Reply post(const std::string& path, const json& body, const std::string& token = {}) {
    return wrap(client_.Post(path, headers(token), body.is_null() ? std::string{} : body.dump(), "application/json"));
  }
  Reply post_raw(const std::string& path, const std::string& body, const std::string& token = {}) {
    return wrap(client_.Post(path, headers(token), body, "application/json"));
  }

  std::string create(int k, const json& reset, json config = json::object()) {
    const json body = {{"k", k},
                       {"game_spec", {{"action", "sign the petition"}, {"reward", "shared win"}, {"reset_condition", reset}}},
                       {"config", config}};
    const auto r = post("/v1/networks", body, "operator-secret");
    if (r.status != 201) throw std::runtime_error("create failed: " + r.body.dump());
    return r.body.at("network_id").get<std::string>();
  }

  /// All events via the operator plane, following pagination.
  std::vector<Event> all_events(const std::string& id) {
    std::vector<Event> out;
    std::uint64_t since = 0;
    while (true) {
      const auto r = get("/v1/networks/" + id + "/events?since=" + std::to_string(since) + "&limit=500",
                         "operator-secret");
      if (r.status != 200) throw std::runtime_error("events failed");
      for (const auto& e : r.body.at("events")) out.push_back(event_from_json(e));
      since = r.body.at("next").get<std::uint64_t>();
      if (!r.body.at("more").get<bool>()) break;
    }
    return out;
  }

 private:
  static httplib::Headers headers(const std::string& token) {
    httplib::Headers h;
    if (!token.empty()) h.emplace("Authorization", "Bearer " + token);
    return h;
  }

  static Reply wrap(const httplib::Result& r) {
    Reply out;
    if (!r) return out;
    out.status = r->status;
    out.etag = r->get_header_value("ETag");
    if (!r->body.empty()) out.body = json::parse(r->body, nullptr, false);
    return out;
  }

  httplib::Client client_;
};

/// Structural privacy checks on a member-scoped view body: whitelisted keys
/// only, and no user id other than the viewer's own and its listed inputs.
inline std::vector<std::string> wire_view_violations(const json& body, const std::set<std::string>& foreign_secrets) {
  static const std::set<std::string> kTop = {"network_id", "user_id", "username", "signal", "message", "game_spec",
                                             "k",          "phase",   "inputs",   "seen",   "tick",    "cycle"};
  static const std::set<std::string> kCard = {"user_id", "username", "bio", "signal", "message"};
  static const std::set<std::string> kSpec = {"action", "reward", "reset_condition"};
  std::vector<std::string> v;
  if (!body.is_object()) return {"body is not an object"};
  for (const auto& [key, value] : body.items()) {
    if (!kTop.count(key)) v.push_back("unexpected field " + key);
  }
  const json spec = body.value("game_spec", json::object());
  for (const auto& [key, value] : spec.items()) {
    if (!kSpec.count(key)) v.push_back("unexpected game_spec field " + key);
  }
  std::set<std::string> ids = {body.value("user_id", std::string{})};
  if (!body.contains("inputs") || !body["inputs"].is_array()) return {"inputs missing"};
  if (body["inputs"].size() > static_cast<std::size_t>(body.value("k", 0))) v.push_back("more cards than K");
  for (const auto& card : body["inputs"]) {
    for (const auto& [key, value] : card.items()) {
      if (!kCard.count(key)) v.push_back("unexpected card field " + key);
    }
    ids.insert(card.value("user_id", std::string{}));
  }
  const auto text = body.dump();
  static const std::regex kId("\"([0-9a-f]{16})\"");
  for (std::sregex_iterator it(text.begin(), text.end(), kId), end; it != end; ++it) {
    if (!ids.count((*it)[1].str())) v.push_back("foreign user id " + (*it)[1].str());
  }
  for (const auto& secret : foreign_secrets) {
    if (!secret.empty() && text.find(secret) != std::string::npos) v.push_back("foreign secret leaked");
  }
  return v;
}

/// Re-executes the operations a log records, in log order, against a fresh
/// network, and returns the log that sequential execution produces. Equal
/// logs show the served history is a sequential execution of requests.
inline std::vector<Event> sequential_reexecution(const std::vector<Event>& log) {
  if (log.empty() || log.front().kind != EventKind::Created) throw std::invalid_argument("log must start with Created");
  const auto& c = log.front().payload;
  auto net = Network::create(c.at("k").get<int>(), game_spec_from_json(c.at("game_spec")),
                             network_config_from_json(c.at("config")));
  for (std::size_t i = 1; i < log.size(); ++i) {
    if (net.events().size() > i) continue;  // produced as part of an earlier call
    const auto& e = log[i];
    const auto& p = e.payload;
    auto user = [&] { return UserId::parse(p.at("user_id").get<std::string>()); };
    switch (e.kind) {
      case EventKind::Joined: {
        LinkRequest request;
        if (i + 1 < log.size() && log[i + 1].kind == EventKind::Linked) {
          const auto& lp = log[i + 1].payload;
          const auto targeted = lp.value("targeted", std::size_t{0});
          for (std::size_t t = 0; t < targeted; ++t) {
            const auto src = UserId::parse(lp.at("sources")[t].get<std::string>());
            request.targets.push_back(net.state().members.at(src).private_id);
          }
        }
        net.join(Profile{p.at("username").get<std::string>(), p.value("bio", std::string{})}, request);
        break;
      }
      case EventKind::SignalOn:
        net.activate_signal(user());
        break;
      case EventKind::MessageSet:
        net.set_message(user(), p.at("message").get<std::string>());
        break;
      case EventKind::Rewired: {
        std::optional<PrivateId> add;
        if (p.at("targeted").get<bool>()) {
          add = net.state().members.at(UserId::parse(p.at("added").get<std::string>())).private_id;
        }
        net.rewire(user(), UserId::parse(p.at("dropped").get<std::string>()), add);
        break;
      }
      case EventKind::LeaveRequested:
        net.request_leave(user());
        break;
      case EventKind::Reset:
        if (p.at("reason") == "manual") {
          net.trigger_reset();
        } else {
          net.check_reset();
        }
        break;
      case EventKind::Ticked:
        net.tick();
        break;
      default:
        throw std::invalid_argument("event " + std::to_string(e.seq) + " does not open an operation");
    }
  }
  return net.events();
}

}  // namespace gridt::testing

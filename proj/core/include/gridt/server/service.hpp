#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdio>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "gridt/protocol/network.hpp"

namespace gridt::server {

/// Wire error. `code` is one of NOT_FOUND, FORBIDDEN, REWIRE_LOCKED,
/// INVALID_INPUT, CONFLICT (or INTERNAL for server faults).
class ApiError : public std::runtime_error {
 public:
  ApiError(std::string code, int status, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)), status_(status) {}

  const std::string& code() const noexcept { return code_; }
  int status() const noexcept { return status_; }

  static ApiError from(const ProtocolError& e);
  static ApiError forbidden(const std::string& message) { return {"FORBIDDEN", 403, message}; }
  static ApiError invalid(const std::string& message) { return {"INVALID_INPUT", 400, message}; }
  static ApiError not_found(const std::string& message) { return {"NOT_FOUND", 404, message}; }

 private:
  std::string code_;
  int status_;
};

/// One hosted network. Mutations go through a single writer lock, are
/// appended and fsynced to the log, then published as an immutable
/// snapshot that readers pick up without touching the writer.
class NetworkHost {
 public:
  NetworkHost(Network network, std::string log_path, bool fresh);
  ~NetworkHost();

  NetworkHost(const NetworkHost&) = delete;
  NetworkHost& operator=(const NetworkHost&) = delete;

  /// Runs fn on the network under the writer lock. Whatever events fn
  /// committed are made durable before returning or rethrowing.
  template <class Fn>
  auto mutate(Fn&& fn) -> decltype(fn(std::declval<Network&>())) {
    std::lock_guard lock(writer_);
    if (failed_) throw ApiError("INTERNAL", 500, "network log is unwritable; restart to recover");
    const auto before = network_.events().size();
    try {
      if constexpr (std::is_void_v<decltype(fn(network_))>) {
        fn(network_);
        persist(before);
      } else {
        auto result = fn(network_);
        persist(before);
        return result;
      }
    } catch (...) {
      if (!failed_) persist(before);
      throw;
    }
  }

  std::shared_ptr<const NetworkState> snapshot() const;
  std::uint64_t version() const;

  /// Blocks until the version moves past `seen`, `deadline` passes or the
  /// host is woken for shutdown. Returns the version observed.
  std::uint64_t wait_for_change(std::uint64_t seen, std::chrono::steady_clock::time_point deadline) const;
  void wake_all();

  std::vector<Event> events_since(std::uint64_t seq, std::size_t limit);

 private:
  void persist(std::size_t first_new);
  void publish();

  std::mutex writer_;
  Network network_;
  std::FILE* log_ = nullptr;
  bool failed_ = false;

  mutable std::mutex snapshot_mutex_;
  mutable std::condition_variable changed_;
  std::shared_ptr<const NetworkState> snapshot_;
  std::uint64_t version_ = 0;
  bool waking_ = false;
};

struct ServiceOptions {
  std::string data_dir;
  bool forbid_mutual_pairs = true;
  std::string operator_token;
  double long_poll_seconds = 30.0;
};

struct JoinResult {
  UserId user_id;
  PrivateId private_id;
  std::string session_token;
};

struct Session {
  std::string network_id;
  UserId user_id;
};

struct RecoveryReport {
  std::size_t networks = 0;
  std::size_t events = 0;
  std::size_t torn_tails = 0;
  std::size_t sessions = 0;
};

/// Everything behind the HTTP routes, usable without sockets.
class Service {
 public:
  explicit Service(ServiceOptions options);
  ~Service();

  /// Loads every network log and the session table from the data directory.
  RecoveryReport recover();

  const ServiceOptions& options() const noexcept { return options_; }

  void require_operator(const std::string& token) const;
  Session authenticate(const std::string& network_id, const std::string& token) const;

  std::string create_network(const nlohmann::json& body);
  JoinResult join(const std::string& network_id, const nlohmann::json& body);

  ViewSnapshot view(const Session& s) const;
  /// Long poll: returns as soon as the member's view differs from the one
  /// identified by `known` (the current view when empty), or on timeout.
  std::pair<ViewSnapshot, std::string> wait_view(const Session& s, const std::string& known,
                                                 std::chrono::milliseconds timeout) const;
  ViewSnapshot signal(const Session& s, std::optional<std::string> message);
  ViewSnapshot set_message(const Session& s, std::string message);
  ViewSnapshot rewire(const Session& s, const nlohmann::json& body);
  void leave(const Session& s);

  nlohmann::json public_info(const std::string& network_id) const;
  nlohmann::json events(const std::string& network_id, std::uint64_t since, std::size_t limit);
  ResetOutcome trigger_reset(const std::string& network_id);
  ResetOutcome tick(const std::string& network_id);
  void tick_all();

  std::shared_ptr<const NetworkState> snapshot(const std::string& network_id) const;
  std::vector<std::string> network_ids() const;

  /// Runs tick_all every `seconds` on a background thread until stop().
  void start_clock(double seconds);
  /// Stops the clock and releases pending long polls.
  void stop();

 private:
  std::shared_ptr<NetworkHost> host(const std::string& network_id) const;
  std::string network_log_path(const std::string& network_id) const;
  void append_session(const std::string& token, const Session& s);

  ServiceOptions options_;
  mutable std::shared_mutex hosts_mutex_;
  std::map<std::string, std::shared_ptr<NetworkHost>> hosts_;

  mutable std::mutex sessions_mutex_;
  std::map<std::string, Session> sessions_;
  std::FILE* sessions_log_ = nullptr;

  std::mutex clock_mutex_;
  std::condition_variable clock_cv_;
  bool stopping_ = false;
  std::thread clock_;
};

/// Hex etag of a view, stable for equal snapshots within one build.
std::string view_etag(const ViewSnapshot& view);

/// 128 random bits as 32 hex characters from std::random_device.
std::string random_token();

}  // namespace gridt::server

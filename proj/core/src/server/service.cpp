#include "gridt/server/service.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <regex>

namespace gridt::server {

namespace fs = std::filesystem;
using json = nlohmann::json;

ApiError ApiError::from(const ProtocolError& e) {
  switch (e.code()) {
    case ErrorCode::NotFound:
      return {"NOT_FOUND", 404, e.what()};
    case ErrorCode::InvalidInput:
      return {"INVALID_INPUT", 400, e.what()};
    case ErrorCode::RewireLocked:
      return {"REWIRE_LOCKED", 423, e.what()};
    case ErrorCode::Conflict:
      return {"CONFLICT", 409, e.what()};
  }
  return {"INTERNAL", 500, e.what()};
}

std::string random_token() {
  static thread_local std::random_device device;
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (int i = 0; i < 4; ++i) {
    std::uint32_t word = device();
    for (int j = 0; j < 8; ++j, word >>= 4) out += hex[word & 15];
  }
  return out;
}

std::string view_etag(const ViewSnapshot& view) {
  // FNV-1a over the canonical JSON rendering.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : to_json(view).dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buffer[17];
  std::snprintf(buffer, sizeof buffer, "%016llx", static_cast<unsigned long long>(h));
  return buffer;
}

// ---------------------------------------------------------------- NetworkHost

NetworkHost::NetworkHost(Network network, std::string log_path, bool fresh)
    : network_(std::move(network)) {
  if (fresh) {
    const int fd = ::open(log_path.c_str(), O_WRONLY | O_CREAT | O_EXCL | O_APPEND, 0600);
    if (fd < 0) {
      if (errno == EEXIST) throw ApiError("CONFLICT", 409, "network id already in use");
      throw ApiError("INTERNAL", 500, "cannot create log: " + std::string(std::strerror(errno)));
    }
    log_ = ::fdopen(fd, "a");
    persist(0);
  } else {
    log_ = std::fopen(log_path.c_str(), "a");
    if (!log_) throw std::runtime_error("cannot open log " + log_path);
  }
  publish();
}

NetworkHost::~NetworkHost() {
  if (log_) std::fclose(log_);
}

void NetworkHost::persist(std::size_t first_new) {
  const auto& events = network_.events();
  if (first_new == events.size()) return;
  std::string batch;
  for (std::size_t i = first_new; i < events.size(); ++i) batch += to_line(events[i]) + '\n';
  // One write per operation, flushed and synced before anyone is answered.
  if (std::fwrite(batch.data(), 1, batch.size(), log_) != batch.size() || std::fflush(log_) != 0 ||
      ::fsync(::fileno(log_)) != 0) {
    failed_ = true;
    throw ApiError("INTERNAL", 500, "event log append failed");
  }
  publish();
}

void NetworkHost::publish() {
  auto next = std::make_shared<const NetworkState>(network_.state());
  {
    std::lock_guard lock(snapshot_mutex_);
    snapshot_ = std::move(next);
    ++version_;
  }
  changed_.notify_all();
}

std::shared_ptr<const NetworkState> NetworkHost::snapshot() const {
  std::lock_guard lock(snapshot_mutex_);
  return snapshot_;
}

std::uint64_t NetworkHost::version() const {
  std::lock_guard lock(snapshot_mutex_);
  return version_;
}

std::uint64_t NetworkHost::wait_for_change(std::uint64_t seen,
                                           std::chrono::steady_clock::time_point deadline) const {
  std::unique_lock lock(snapshot_mutex_);
  changed_.wait_until(lock, deadline, [&] { return version_ != seen || waking_; });
  return version_;
}

void NetworkHost::wake_all() {
  {
    std::lock_guard lock(snapshot_mutex_);
    waking_ = true;
  }
  changed_.notify_all();
}

std::vector<Event> NetworkHost::events_since(std::uint64_t seq, std::size_t limit) {
  std::lock_guard lock(writer_);
  const auto page = network_.events_since(seq);
  return {page.begin(), page.begin() + static_cast<std::ptrdiff_t>(std::min(limit, page.size()))};
}

// -------------------------------------------------------------------- Service

namespace {

const std::regex kNetworkId("[A-Za-z0-9_-]{1,64}");

std::string bearer(const std::string& header) {
  static const std::string prefix = "Bearer ";
  if (header.compare(0, prefix.size(), prefix) != 0) return {};
  return header.substr(prefix.size());
}

bool constant_time_equal(const std::string& a, const std::string& b) {
  if (a.size() != b.size()) return false;
  unsigned char diff = 0;
  for (std::size_t i = 0; i < a.size(); ++i) diff |= static_cast<unsigned char>(a[i] ^ b[i]);
  return diff == 0;
}

// Drops events after the last operation boundary at which the state is
// consistent, for logs whose final operation never finished writing.
// Replay errors are not repaired: they propagate.
std::vector<Event> complete_prefix(std::vector<Event> events) {
  while (!events.empty()) {
    if (check_invariants(Network::replay(events).state()).empty()) return events;
    auto last_open = events.size() - 1;
    while (last_open > 0 && !opens_operation(events[last_open].kind)) --last_open;
    events.resize(last_open);
  }
  return events;
}

}  // namespace

Service::Service(ServiceOptions options) : options_(std::move(options)) {
  if (options_.operator_token.empty()) options_.operator_token = random_token();
  fs::create_directories(fs::path(options_.data_dir) / "networks");
  const auto sessions_path = (fs::path(options_.data_dir) / "sessions.log").string();
  const int fd = ::open(sessions_path.c_str(), O_WRONLY | O_CREAT | O_APPEND, 0600);
  if (fd < 0) throw std::runtime_error("cannot open " + sessions_path);
  sessions_log_ = ::fdopen(fd, "a");
}

Service::~Service() {
  stop();
  if (sessions_log_) std::fclose(sessions_log_);
}

std::string Service::network_log_path(const std::string& network_id) const {
  return (fs::path(options_.data_dir) / "networks" / (network_id + ".log")).string();
}

RecoveryReport Service::recover() {
  RecoveryReport report;
  std::vector<fs::path> logs;
  for (const auto& entry : fs::directory_iterator(fs::path(options_.data_dir) / "networks")) {
    if (entry.is_regular_file() && entry.path().extension() == ".log") logs.push_back(entry.path());
  }
  std::sort(logs.begin(), logs.end());
  for (const auto& path : logs) {
    std::ifstream in(path, std::ios::binary);
    auto prefix = read_log_prefix(in);
    in.close();
    if (prefix.events.empty()) continue;
    const auto full = prefix.events.size();
    auto events = complete_prefix(std::move(prefix.events));
    if (prefix.torn_tail || events.size() != full) {
      ++report.torn_tails;
      const auto tmp = path.string() + ".tmp";
      {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        write_log(out, events);
      }
      fs::rename(tmp, path);
    }
    if (events.empty()) continue;
    auto network = Network::replay(events);
    const auto id = network.state().network_id;
    report.events += events.size();
    auto host = std::make_shared<NetworkHost>(std::move(network), path.string(), false);
    std::unique_lock lock(hosts_mutex_);
    hosts_[id] = std::move(host);
    ++report.networks;
  }

  std::ifstream sessions(fs::path(options_.data_dir) / "sessions.log");
  std::string line;
  while (std::getline(sessions, line)) {
    if (sessions.eof()) break;  // unterminated: the append never completed
    try {
      const auto j = json::parse(line);
      std::lock_guard lock(sessions_mutex_);
      sessions_[j.at("token").get<std::string>()] =
          Session{j.at("network_id").get<std::string>(), UserId::parse(j.at("user_id").get<std::string>())};
      ++report.sessions;
    } catch (const std::exception&) {
    }
  }
  return report;
}

void Service::require_operator(const std::string& header) const {
  if (!constant_time_equal(bearer(header), options_.operator_token)) {
    throw ApiError::forbidden("operator token required");
  }
}

Session Service::authenticate(const std::string& network_id, const std::string& header) const {
  const auto token = bearer(header);
  if (token.empty()) throw ApiError::forbidden("session token required");
  std::lock_guard lock(sessions_mutex_);
  auto it = sessions_.find(token);
  if (it == sessions_.end() || it->second.network_id != network_id) {
    throw ApiError::forbidden("session token is not valid for this network");
  }
  return it->second;
}

std::shared_ptr<NetworkHost> Service::host(const std::string& network_id) const {
  std::shared_lock lock(hosts_mutex_);
  auto it = hosts_.find(network_id);
  if (it == hosts_.end()) throw ApiError::not_found("no such network");
  return it->second;
}

std::shared_ptr<const NetworkState> Service::snapshot(const std::string& network_id) const {
  return host(network_id)->snapshot();
}

std::vector<std::string> Service::network_ids() const {
  std::shared_lock lock(hosts_mutex_);
  std::vector<std::string> ids;
  for (const auto& [id, h] : hosts_) ids.push_back(id);
  return ids;
}

std::string Service::create_network(const json& body) {
  if (!body.is_object()) throw ApiError::invalid("body must be a JSON object");
  const int k = body.at("k").get<int>();
  const auto spec = game_spec_from_json(body.at("game_spec"));
  const json cfg = body.value("config", json::object());
  if (!cfg.is_object()) throw ApiError::invalid("config must be an object");
  auto config = network_config_from_json(cfg);
  if (!cfg.contains("forbid_mutual_pairs")) config.forbid_mutual_pairs = options_.forbid_mutual_pairs;
  if (!cfg.contains("seed")) {
    std::random_device device;
    config.seed = (static_cast<std::uint64_t>(device()) << 32) | device();
  }
  if (!config.network_id.empty() && !std::regex_match(config.network_id, kNetworkId)) {
    throw ApiError::invalid("network_id must match [A-Za-z0-9_-]{1,64}");
  }
  auto network = Network::create(k, spec, config);
  const auto id = network.state().network_id;

  std::unique_lock lock(hosts_mutex_);
  if (hosts_.count(id)) throw ApiError("CONFLICT", 409, "network id already in use");
  hosts_[id] = std::make_shared<NetworkHost>(std::move(network), network_log_path(id), true);
  return id;
}

void Service::append_session(const std::string& token, const Session& s) {
  const auto line =
      json{{"token", token}, {"network_id", s.network_id}, {"user_id", s.user_id.str()}}.dump() + '\n';
  if (std::fwrite(line.data(), 1, line.size(), sessions_log_) != line.size() || std::fflush(sessions_log_) != 0 ||
      ::fsync(::fileno(sessions_log_)) != 0) {
    throw ApiError("INTERNAL", 500, "session log append failed");
  }
}

JoinResult Service::join(const std::string& network_id, const json& body) {
  if (!body.is_object()) throw ApiError::invalid("body must be a JSON object");
  const auto& p = body.at("profile");
  Profile profile{p.at("username").get<std::string>(), p.value("bio", std::string{})};
  LinkRequest request;
  if (auto it = body.find("link_request"); it != body.end() && !it->is_null()) {
    if (it->is_string()) {
      if (it->get<std::string>() != "random") throw ApiError::invalid("link_request must be \"random\" or {targets}");
    } else {
      request = LinkRequest::targeted(it->at("targets").get<std::vector<PrivateId>>());
    }
  }
  auto h = host(network_id);
  // The session line is synced just before the join events. A crash in
  // between leaves a token whose member never existed (NOT_FOUND).
  return h->mutate([&](Network& net) {
    const auto m = net.join(profile, request);
    JoinResult r{m.user_id, m.private_id, random_token()};
    std::lock_guard lock(sessions_mutex_);
    sessions_[r.session_token] = Session{network_id, r.user_id};
    append_session(r.session_token, sessions_[r.session_token]);
    return r;
  });
}

ViewSnapshot Service::view(const Session& s) const { return make_view(*host(s.network_id)->snapshot(), s.user_id); }

std::pair<ViewSnapshot, std::string> Service::wait_view(const Session& s, const std::string& known,
                                                        std::chrono::milliseconds timeout) const {
  auto h = host(s.network_id);
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  auto version = h->version();
  auto current = make_view(*h->snapshot(), s.user_id);
  auto tag = view_etag(current);
  const auto target = known.empty() ? tag : known;
  while (tag == target && std::chrono::steady_clock::now() < deadline) {
    const auto next = h->wait_for_change(version, deadline);
    if (next == version) break;  // timed out or woken for shutdown
    version = next;
    current = make_view(*h->snapshot(), s.user_id);
    tag = view_etag(current);
  }
  return {std::move(current), std::move(tag)};
}

ViewSnapshot Service::signal(const Session& s, std::optional<std::string> message) {
  return host(s.network_id)->mutate([&](Network& net) {
    auto view = net.activate_signal(s.user_id, message);
    // A pending leaver departs in the reset; they get the view they acted on.
    if (net.check_reset() && net.state().find(s.user_id)) view = net.view(s.user_id);
    return view;
  });
}

ViewSnapshot Service::set_message(const Session& s, std::string message) {
  return host(s.network_id)->mutate([&](Network& net) { return net.set_message(s.user_id, message); });
}

ViewSnapshot Service::rewire(const Session& s, const json& body) {
  if (!body.is_object()) throw ApiError::invalid("body must be a JSON object");
  const auto drop = UserId::parse(body.at("drop_user_id").get<std::string>());
  std::optional<PrivateId> add;
  const auto& a = body.value("add", json("random"));
  if (a.is_string()) {
    if (a.get<std::string>() != "random") throw ApiError::invalid("add must be \"random\" or {private_id}");
  } else {
    add = a.at("private_id").get<std::string>();
  }
  return host(s.network_id)->mutate([&](Network& net) { return net.rewire(s.user_id, drop, add); });
}

void Service::leave(const Session& s) {
  host(s.network_id)->mutate([&](Network& net) { net.request_leave(s.user_id); });
}

json Service::public_info(const std::string& network_id) const {
  const auto state = host(network_id)->snapshot();
  json j = {{"game_spec", to_json(state->spec)},
            {"k", state->k},
            {"phase", std::string(to_string(state->phase))},
            {"cycle", state->cycle}};
  if (state->config.expose_member_count) j["n"] = state->size();
  return j;
}

json Service::events(const std::string& network_id, std::uint64_t since, std::size_t limit) {
  auto page = host(network_id)->events_since(since, limit + 1);
  const bool more = page.size() > limit;
  if (more) page.pop_back();
  auto list = json::array();
  for (const auto& e : page) list.push_back(to_json(e));
  return {{"events", list}, {"next", page.empty() ? since : page.back().seq}, {"more", more}};
}

ResetOutcome Service::trigger_reset(const std::string& network_id) {
  return host(network_id)->mutate([](Network& net) { return net.trigger_reset(); });
}

ResetOutcome Service::tick(const std::string& network_id) {
  return host(network_id)->mutate([](Network& net) { return net.tick(); });
}

void Service::tick_all() {
  for (const auto& id : network_ids()) {
    try {
      tick(id);
    } catch (const ApiError&) {
      // a failed host keeps refusing writes; the others keep ticking
    }
  }
}

void Service::start_clock(double seconds) {
  if (seconds <= 0) return;
  clock_ = std::thread([this, seconds] {
    const auto period = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
        std::chrono::duration<double>(seconds));
    auto next = std::chrono::steady_clock::now() + period;
    std::unique_lock lock(clock_mutex_);
    while (!clock_cv_.wait_until(lock, next, [this] { return stopping_; })) {
      lock.unlock();
      tick_all();
      lock.lock();
      next += period;
    }
  });
}

void Service::stop() {
  {
    std::lock_guard lock(clock_mutex_);
    stopping_ = true;
  }
  clock_cv_.notify_all();
  if (clock_.joinable()) clock_.join();
  std::shared_lock lock(hosts_mutex_);
  for (auto& [id, h] : hosts_) h->wake_all();
}

}  // namespace gridt::server

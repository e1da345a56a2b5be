#include "gridt/protocol/network.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>
#include <utility>

namespace gridt {
namespace {

using nlohmann::json;

constexpr double kFractionEpsilon = 1e-12;

[[noreturn]] void reject(ErrorCode code, const std::string& what) {
  throw ProtocolError(code, what);
}

[[noreturn]] void inconsistent(const Event& event, const std::string& what) {
  throw std::invalid_argument("event " + std::to_string(event.seq) + " (" +
                              std::string(to_string(event.kind)) + "): " + what);
}

bool contains(const std::vector<UserId>& ids, UserId id) {
  return std::find(ids.begin(), ids.end(), id) != ids.end();
}

std::string hex128(Rng& rng) {
  char buffer[33];
  const auto hi = rng();
  const auto lo = rng();
  std::snprintf(buffer, sizeof buffer, "%016llx%016llx", static_cast<unsigned long long>(hi),
                static_cast<unsigned long long>(lo));
  return buffer;
}

UserId id_at(const json& payload, const char* key) {
  return UserId::parse(payload.at(key).get<std::string>());
}

json ids_to_json(const std::vector<UserId>& ids) {
  auto out = json::array();
  for (UserId id : ids) out.push_back(id.str());
  return out;
}

void validate_text(std::string_view text, std::size_t max, const char* what, bool non_empty) {
  const auto length = utf8_length(text);
  if (!length) reject(ErrorCode::InvalidInput, std::string(what) + " is not valid UTF-8");
  if (non_empty && *length == 0) reject(ErrorCode::InvalidInput, std::string(what) + " is empty");
  if (*length > max) {
    reject(ErrorCode::InvalidInput,
           std::string(what) + " exceeds " + std::to_string(max) + " characters");
  }
}

void validate_creation(int k, const GameSpec& spec, const NetworkConfig& config) {
  if (k < 1 || k > kMaxK) {
    reject(ErrorCode::InvalidInput, "K must be in [1, " + std::to_string(kMaxK) + "]");
  }
  if (spec.action.empty()) reject(ErrorCode::InvalidInput, "game spec needs an action");
  if (spec.reward.empty()) reject(ErrorCode::InvalidInput, "game spec needs a reward");
  if (const auto* f = std::get_if<FractionThreshold>(&spec.reset_condition)) {
    if (!(f->q_reset > 0.0 && f->q_reset <= 1.0)) {
      reject(ErrorCode::InvalidInput, "reset fraction must be in (0, 1]");
    }
  }
  if (const auto* d = std::get_if<Deadline>(&spec.reset_condition)) {
    if (d->ticks == 0) reject(ErrorCode::InvalidInput, "reset deadline must be > 0 ticks");
  }
  if (config.capacity && *config.capacity == 0) {
    reject(ErrorCode::InvalidInput, "capacity must be positive");
  }
}

void recompute_phase(NetworkState& state) {
  state.phase = state.members.size() >= static_cast<std::size_t>(state.k) + 1 ? Phase::Active
                                                                              : Phase::Forming;
}

Member& member_for(NetworkState& state, const Event& event, UserId id) {
  auto it = state.members.find(id);
  if (it == state.members.end()) inconsistent(event, "unknown member " + id.str());
  return it->second;
}

void add_source(NetworkState& state, const Event& event, Member& member, UserId source) {
  if (source == member.id) inconsistent(event, "self link");
  if (state.members.count(source) == 0) inconsistent(event, "source is not a member");
  if (contains(member.inputs, source)) inconsistent(event, "duplicate source");
  member.inputs.push_back(source);
}

void sync_rng(NetworkState& state, const json& payload) {
  if (auto it = payload.find("rng_draws"); it != payload.end()) {
    state.rng.reposition(it->get<std::uint64_t>());
  }
}

void apply_unchecked(NetworkState& state, const Event& event) {
  const json& p = event.payload;
  switch (event.kind) {
    case EventKind::Created: {
      if (state.k != 0) inconsistent(event, "network already created");
      if (event.seq != 1) inconsistent(event, "Created must be the first event");
      NetworkState fresh;
      fresh.k = p.at("k").get<int>();
      fresh.spec = game_spec_from_json(p.at("game_spec"));
      fresh.config = network_config_from_json(p.at("config"));
      fresh.network_id = fresh.config.network_id;
      try {
        validate_creation(fresh.k, fresh.spec, fresh.config);
      } catch (const ProtocolError& e) {
        inconsistent(event, e.what());
      }
      fresh.rng = Rng(fresh.config.seed);
      state = std::move(fresh);
      break;
    }
    case EventKind::Joined: {
      Member m;
      m.id = id_at(p, "user_id");
      if (state.members.count(m.id) || state.retired.count(m.id)) {
        inconsistent(event, "user id reused");
      }
      m.profile.username = p.at("username").get<std::string>();
      m.profile.bio = p.value("bio", std::string{});
      m.private_id = p.at("private_id").get<std::string>();
      state.members.emplace(m.id, std::move(m));
      break;
    }
    case EventKind::Linked:
    case EventKind::LinkRepaired: {
      Member& m = member_for(state, event, id_at(p, "user_id"));
      if (event.kind == EventKind::Linked) {
        for (const auto& s : p.at("sources")) add_source(state, event, m, UserId::parse(s.get<std::string>()));
      } else {
        add_source(state, event, m, id_at(p, "source"));
      }
      break;
    }
    case EventKind::Rewired: {
      Member& m = member_for(state, event, id_at(p, "user_id"));
      if (!m.signal.active) inconsistent(event, "rewire while signal is 0");
      const UserId dropped = id_at(p, "dropped");
      const UserId added = id_at(p, "added");
      auto it = std::find(m.inputs.begin(), m.inputs.end(), dropped);
      if (it == m.inputs.end()) inconsistent(event, "dropped source is not an input");
      if (added == m.id || contains(m.inputs, added) || state.members.count(added) == 0) {
        inconsistent(event, "invalid replacement source");
      }
      *it = added;
      break;
    }
    case EventKind::SignalOn: {
      Member& m = member_for(state, event, id_at(p, "user_id"));
      if (m.signal.active) inconsistent(event, "signal already 1");
      m.signal.active = true;
      break;
    }
    case EventKind::MessageSet: {
      Member& m = member_for(state, event, id_at(p, "user_id"));
      if (!m.signal.active) inconsistent(event, "message on inactive signal");
      m.signal.message = p.at("message").get<std::string>();
      break;
    }
    case EventKind::LeaveRequested: {
      const UserId id = id_at(p, "user_id");
      member_for(state, event, id);
      state.pending_departures.insert(id);
      break;
    }
    case EventKind::Reset: {
      if (p.at("cycle").get<std::uint64_t>() != state.cycle + 1) {
        inconsistent(event, "cycle does not advance by one");
      }
      for (auto& [id, m] : state.members) m.signal = Signal{};
      state.cycle += 1;
      state.cycle_start_tick = state.tick;
      break;
    }
    case EventKind::Departed: {
      const UserId id = id_at(p, "user_id");
      member_for(state, event, id);
      if (state.pending_departures.erase(id) == 0) inconsistent(event, "departure was not requested");
      state.members.erase(id);
      state.retired.insert(id);
      for (auto& [other, m] : state.members) std::erase(m.inputs, id);
      break;
    }
    case EventKind::Ticked:
      state.tick = event.tick;
      break;
  }
  sync_rng(state, p);
  recompute_phase(state);
}

}  // namespace

std::string_view to_string(ResetReason reason) {
  switch (reason) {
    case ResetReason::Threshold: return "threshold";
    case ResetReason::Deadline: return "deadline";
    case ResetReason::Manual: return "manual";
  }
  return "unknown";
}

void apply_event(NetworkState& state, const Event& event) {
  if (event.kind != EventKind::Created) {
    if (state.k == 0) inconsistent(event, "log does not start with Created");
    if (event.seq != state.last_seq + 1) inconsistent(event, "sequence gap");
    const auto expected_tick = event.kind == EventKind::Ticked ? state.tick + 1 : state.tick;
    if (event.tick != expected_tick) inconsistent(event, "unexpected tick");
  } else if (event.tick != 0) {
    inconsistent(event, "Created must be at tick 0");
  }
  try {
    apply_unchecked(state, event);
  } catch (const json::exception& e) {
    inconsistent(event, std::string("malformed payload: ") + e.what());
  } catch (const ProtocolError& e) {
    inconsistent(event, e.what());
  }
  state.last_seq = event.seq;
}

Network Network::create(int k, GameSpec spec, NetworkConfig config) {
  validate_creation(k, spec, config);
  if (config.network_id.empty()) {
    config.network_id = "n" + UserId{Rng::derive(config.seed, 0)}.str();
  }
  Network net;
  Event created{1, 0, EventKind::Created,
                {{"k", k}, {"game_spec", to_json(spec)}, {"config", to_json(config)}}};
  apply_event(net.state_, created);
  net.log_.push_back(std::move(created));
  return net;
}

Network Network::replay(std::span<const Event> log) {
  if (log.empty() || log.front().kind != EventKind::Created) {
    throw std::invalid_argument("log must start with a Created event");
  }
  Network net;
  for (const auto& event : log) apply_event(net.state_, event);
  net.log_.assign(log.begin(), log.end());
  return net;
}

std::span<const Event> Network::events_since(std::uint64_t seq) const {
  // seq n lives at index n - 1.
  const auto start = std::min<std::uint64_t>(seq, log_.size());
  return std::span<const Event>(log_).subspan(start);
}

void Network::commit(EventKind kind, json payload) {
  Event event{state_.last_seq + 1,
              kind == EventKind::Ticked ? state_.tick + 1 : state_.tick,
              kind, std::move(payload)};
  apply_event(state_, event);
  log_.push_back(std::move(event));
}

const Member& Network::require_member(UserId user) const {
  const Member* m = state_.find(user);
  if (m == nullptr) reject(ErrorCode::NotFound, "unknown user " + user.str());
  return *m;
}

std::vector<UserId> Network::sample(std::vector<UserId> candidates, std::size_t count) {
  // Partial Fisher-Yates over a deterministically ordered pool.
  for (std::size_t i = 0; i < count; ++i) {
    const auto j = i + state_.rng.below(candidates.size() - i);
    std::swap(candidates[i], candidates[j]);
  }
  candidates.resize(count);
  return candidates;
}

Membership Network::join(const Profile& profile, const LinkRequest& request) {
  validate_text(profile.username, kMaxUsernameLength, "username", true);
  validate_text(profile.bio, kMaxMessageLength, "bio", false);
  if (state_.config.capacity && state_.size() >= *state_.config.capacity) {
    reject(ErrorCode::Conflict, "network is at capacity");
  }
  if (request.targets.size() > static_cast<std::size_t>(state_.k)) {
    reject(ErrorCode::InvalidInput, "more targeted sources than K");
  }
  std::vector<UserId> targeted;
  for (const auto& pid : request.targets) {
    const Member* m = state_.find_by_private_id(pid);
    if (m == nullptr) reject(ErrorCode::InvalidInput, "unresolvable private id");
    if (contains(targeted, m->id)) reject(ErrorCode::InvalidInput, "duplicate targeted source");
    targeted.push_back(m->id);
  }

  UserId id;
  do {
    id = UserId{state_.rng()};
  } while (state_.members.count(id) || state_.retired.count(id));
  PrivateId private_id = hex128(state_.rng);

  commit(EventKind::Joined, {{"user_id", id.str()},
                             {"username", profile.username},
                             {"bio", profile.bio},
                             {"private_id", private_id},
                             {"rng_draws", state_.rng.draws()}});

  std::vector<UserId> others;
  for (const auto& [other, m] : state_.members) {
    if (other != id) others.push_back(other);
  }

  if (state_.size() <= static_cast<std::size_t>(state_.k) + 1) {
    // Bootstrap: links are all-to-all until the network first holds K+1 members.
    if (!others.empty()) {
      commit(EventKind::Linked, {{"user_id", id.str()}, {"sources", ids_to_json(others)},
                                 {"mode", "complete"}});
    }
    for (UserId other : others) {
      commit(EventKind::Linked, {{"user_id", other.str()}, {"sources", json::array({id.str()})},
                                 {"mode", "complete"}});
    }
  } else {
    std::vector<UserId> pool;
    for (UserId other : others) {
      if (contains(targeted, other)) continue;
      if (state_.config.forbid_mutual_pairs && contains(state_.members.at(other).inputs, id)) continue;
      pool.push_back(other);
    }
    auto sources = targeted;
    for (UserId s : sample(std::move(pool), state_.k - targeted.size())) sources.push_back(s);
    commit(EventKind::Linked, {{"user_id", id.str()},
                               {"sources", ids_to_json(sources)},
                               {"targeted", targeted.size()},
                               {"mode", "sampled"},
                               {"rng_draws", state_.rng.draws()}});
  }
  return {id, std::move(private_id)};
}

ViewSnapshot Network::activate_signal(UserId user, std::optional<std::string> message) {
  const Member& m = require_member(user);
  const bool has_message = message && !message->empty();
  if (has_message) validate_text(*message, kMaxMessageLength, "message", false);
  if (!m.signal.active) commit(EventKind::SignalOn, {{"user_id", user.str()}});
  if (has_message && *message != state_.members.at(user).signal.message) {
    commit(EventKind::MessageSet, {{"user_id", user.str()}, {"message", *message}});
  }
  return view(user);
}

ViewSnapshot Network::set_message(UserId user, std::string message) {
  const Member& m = require_member(user);
  if (!m.signal.active) reject(ErrorCode::InvalidInput, "a message requires an active signal");
  validate_text(message, kMaxMessageLength, "message", false);
  if (message != m.signal.message) {
    commit(EventKind::MessageSet, {{"user_id", user.str()}, {"message", std::move(message)}});
  }
  return view(user);
}

ViewSnapshot Network::rewire(UserId user, UserId drop, std::optional<PrivateId> add) {
  const Member& m = require_member(user);
  if (!m.signal.active) {
    reject(ErrorCode::RewireLocked, "inputs can only be rewired after activating the signal");
  }
  if (state_.phase == Phase::Forming) {
    reject(ErrorCode::Conflict, "inputs are fixed while the network is forming");
  }
  if (!contains(m.inputs, drop)) reject(ErrorCode::InvalidInput, "dropped user is not an input");

  const bool forbid = state_.config.forbid_mutual_pairs;
  UserId replacement;
  if (add) {
    const Member* target = state_.find_by_private_id(*add);
    if (target == nullptr) reject(ErrorCode::InvalidInput, "unresolvable private id");
    if (target->id == drop) reject(ErrorCode::InvalidInput, "replacement equals dropped source");
    if (target->id == user) reject(ErrorCode::InvalidInput, "cannot link to self");
    if (contains(m.inputs, target->id)) reject(ErrorCode::InvalidInput, "already an input");
    if (forbid && contains(target->inputs, user)) {
      reject(ErrorCode::InvalidInput, "link would create a mutual pair");
    }
    replacement = target->id;
  } else {
    std::vector<UserId> pool;
    for (const auto& [other, om] : state_.members) {
      if (other == user || contains(m.inputs, other)) continue;
      if (forbid && contains(om.inputs, user)) continue;
      pool.push_back(other);
    }
    if (pool.empty()) reject(ErrorCode::Conflict, "no eligible replacement source");
    replacement = sample(std::move(pool), 1).front();
  }
  commit(EventKind::Rewired, {{"user_id", user.str()},
                              {"dropped", drop.str()},
                              {"added", replacement.str()},
                              {"targeted", add.has_value()},
                              {"rng_draws", state_.rng.draws()}});
  return view(user);
}

void Network::request_leave(UserId user) {
  require_member(user);
  if (state_.pending_departures.count(user)) return;
  commit(EventKind::LeaveRequested, {{"user_id", user.str()}});
}

bool Network::reset_due() const {
  struct Visitor {
    const NetworkState& s;
    bool operator()(const FractionThreshold& r) const {
      if (s.members.empty()) return false;
      const double fraction =
          static_cast<double>(s.active_count()) / static_cast<double>(s.members.size());
      return fraction >= r.q_reset - kFractionEpsilon;
    }
    bool operator()(const Deadline& r) const { return s.tick - s.cycle_start_tick >= r.ticks; }
    bool operator()(const Manual&) const { return false; }
  };
  return std::visit(Visitor{state_}, state_.spec.reset_condition);
}

ResetOutcome Network::check_reset() {
  if (!reset_due()) return {};
  const auto reason = std::holds_alternative<Deadline>(state_.spec.reset_condition)
                          ? ResetReason::Deadline
                          : ResetReason::Threshold;
  return fire_reset(reason);
}

ResetOutcome Network::trigger_reset() { return fire_reset(ResetReason::Manual); }

ResetOutcome Network::tick() {
  commit(EventKind::Ticked, json::object());
  return check_reset();
}

ResetOutcome Network::fire_reset(ResetReason reason) {
  ResetOutcome outcome{true, reason, 0, 0};
  const std::vector<UserId> departing(state_.pending_departures.begin(),
                                      state_.pending_departures.end());
  commit(EventKind::Reset, {{"cycle", state_.cycle + 1},
                            {"reason", to_string(reason)},
                            {"active", state_.active_count()},
                            {"departing", departing.size()}});
  for (UserId id : departing) commit(EventKind::Departed, {{"user_id", id.str()}});
  outcome.departed = departing.size();

  const auto k = static_cast<std::size_t>(state_.k);
  std::vector<UserId> ids;
  for (const auto& [id, m] : state_.members) ids.push_back(id);

  if (state_.size() <= k) {
    // Back to forming: restore all-to-all links.
    for (UserId u : ids) {
      for (UserId v : ids) {
        if (u == v || contains(state_.members.at(u).inputs, v)) continue;
        commit(EventKind::LinkRepaired,
               {{"user_id", u.str()}, {"source", v.str()}, {"mode", "complete"}});
        ++outcome.repaired;
      }
    }
    return outcome;
  }

  const bool forbid = state_.config.forbid_mutual_pairs;
  for (UserId u : ids) {
    const auto& inputs = state_.members.at(u).inputs;
    if (inputs.size() >= k) continue;
    const std::size_t need = k - inputs.size();
    std::vector<UserId> eligible, mutual_only;
    for (UserId v : ids) {
      if (v == u || contains(inputs, v)) continue;
      if (forbid && contains(state_.members.at(v).inputs, u)) {
        mutual_only.push_back(v);
      } else {
        eligible.push_back(v);
      }
    }
    std::vector<std::pair<UserId, bool>> picks;
    if (eligible.size() >= need) {
      for (UserId v : sample(std::move(eligible), need)) picks.emplace_back(v, false);
    } else {
      // Not enough sources without closing a 2-cycle; indegree wins.
      const auto rest = need - eligible.size();
      for (UserId v : eligible) picks.emplace_back(v, false);
      for (UserId v : sample(std::move(mutual_only), rest)) picks.emplace_back(v, true);
    }
    for (const auto& [v, forced] : picks) {
      commit(EventKind::LinkRepaired, {{"user_id", u.str()},
                                       {"source", v.str()},
                                       {"mode", forced ? "forced" : "sampled"},
                                       {"rng_draws", state_.rng.draws()}});
      ++outcome.repaired;
    }
  }
  return outcome;
}

std::vector<std::string> check_invariants(const NetworkState& state) {
  std::vector<std::string> out;
  auto fail = [&out](std::string message) { out.push_back(std::move(message)); };

  const auto n = state.members.size();
  const auto k = static_cast<std::size_t>(state.k);
  if (state.k < 1 || state.k > kMaxK) fail("K out of range");
  const Phase expected = n >= k + 1 ? Phase::Active : Phase::Forming;
  if (state.phase != expected) fail("phase does not match member count");
  if (state.cycle_start_tick > state.tick) fail("cycle starts in the future");

  std::set<std::string> private_ids;
  for (const auto& [id, m] : state.members) {
    const auto who = "member " + id.str() + ": ";
    if (m.id != id) fail(who + "key mismatch");
    if (state.retired.count(id)) fail(who + "reuses a retired id");
    if (!private_ids.insert(m.private_id).second) fail(who + "duplicate private id");
    const auto name_len = utf8_length(m.profile.username);
    if (!name_len || *name_len == 0 || *name_len > kMaxUsernameLength) fail(who + "bad username");
    if (!m.signal.active && !m.signal.message.empty()) fail(who + "message without signal");
    const auto msg_len = utf8_length(m.signal.message);
    if (!msg_len || *msg_len > kMaxMessageLength) fail(who + "bad message");

    std::set<UserId> distinct(m.inputs.begin(), m.inputs.end());
    if (distinct.size() != m.inputs.size()) fail(who + "duplicate input");
    if (distinct.count(id)) fail(who + "self link");
    for (UserId s : m.inputs) {
      if (!state.members.count(s)) fail(who + "input " + s.str() + " is not a member");
    }
    if (expected == Phase::Active && m.inputs.size() != k) {
      fail(who + "indegree " + std::to_string(m.inputs.size()) + " != K");
    }
    if (expected == Phase::Forming && m.inputs.size() != n - 1) {
      fail(who + "forming member is not linked to all others");
    }
  }
  for (UserId id : state.pending_departures) {
    if (!state.members.count(id)) fail("pending departure " + id.str() + " is not a member");
  }
  return out;
}

json to_json(const GameSpec& spec) {
  json reset;
  std::visit(
      [&reset](const auto& rule) {
        using T = std::decay_t<decltype(rule)>;
        if constexpr (std::is_same_v<T, FractionThreshold>) {
          reset = {{"type", "fraction"}, {"q_reset", rule.q_reset}};
        } else if constexpr (std::is_same_v<T, Deadline>) {
          reset = {{"type", "deadline"}, {"ticks", rule.ticks}};
        } else {
          reset = {{"type", "manual"}};
        }
      },
      spec.reset_condition);
  return {{"action", spec.action}, {"reward", spec.reward}, {"reset_condition", reset}};
}

GameSpec game_spec_from_json(const json& j) {
  GameSpec spec;
  spec.action = j.at("action").get<std::string>();
  spec.reward = j.at("reward").get<std::string>();
  const json& reset = j.at("reset_condition");
  const auto type = reset.at("type").get<std::string>();
  if (type == "fraction") {
    spec.reset_condition = FractionThreshold{reset.at("q_reset").get<double>()};
  } else if (type == "deadline") {
    const auto ticks = reset.at("ticks").get<std::int64_t>();
    if (ticks <= 0) reject(ErrorCode::InvalidInput, "reset deadline must be > 0 ticks");
    spec.reset_condition = Deadline{static_cast<std::uint64_t>(ticks)};
  } else if (type == "manual") {
    spec.reset_condition = Manual{};
  } else {
    reject(ErrorCode::InvalidInput, "unknown reset condition type: " + type);
  }
  return spec;
}

json to_json(const NetworkConfig& config) {
  json j = {{"network_id", config.network_id},
            {"seed", config.seed},
            {"forbid_mutual_pairs", config.forbid_mutual_pairs},
            {"capacity", nullptr},
            {"expose_member_count", config.expose_member_count}};
  if (config.capacity) j["capacity"] = *config.capacity;
  return j;
}

NetworkConfig network_config_from_json(const json& j) {
  NetworkConfig config;
  config.network_id = j.value("network_id", std::string{});
  config.seed = j.value("seed", std::uint64_t{0});
  config.forbid_mutual_pairs = j.value("forbid_mutual_pairs", true);
  if (auto it = j.find("capacity"); it != j.end() && !it->is_null()) {
    config.capacity = it->get<std::size_t>();
  }
  config.expose_member_count = j.value("expose_member_count", false);
  return config;
}

json to_json(const NetworkState& state) {
  auto members = json::array();
  for (const auto& [id, m] : state.members) {
    members.push_back({{"user_id", id.str()},
                       {"username", m.profile.username},
                       {"bio", m.profile.bio},
                       {"private_id", m.private_id},
                       {"signal", m.signal.active ? 1 : 0},
                       {"message", m.signal.message},
                       {"inputs", ids_to_json(m.inputs)}});
  }
  auto pending = json::array();
  for (UserId id : state.pending_departures) pending.push_back(id.str());
  auto retired = json::array();
  for (UserId id : state.retired) retired.push_back(id.str());
  return {{"network_id", state.network_id},
          {"k", state.k},
          {"game_spec", to_json(state.spec)},
          {"config", to_json(state.config)},
          {"phase", to_string(state.phase)},
          {"tick", state.tick},
          {"cycle", state.cycle},
          {"cycle_start_tick", state.cycle_start_tick},
          {"members", std::move(members)},
          {"pending_departures", std::move(pending)},
          {"retired", std::move(retired)},
          {"rng", {{"seed", state.rng.seed()}, {"draws", state.rng.draws()}}},
          {"last_seq", state.last_seq}};
}

}  // namespace gridt

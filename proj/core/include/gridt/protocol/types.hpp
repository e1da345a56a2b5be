#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "gridt/rng.hpp"

namespace gridt {

/// Opaque member identifier. Drawn at random so identifiers carry no
/// information about join order or network size.
struct UserId {
  std::uint64_t value = 0;

  std::string str() const;
  static UserId parse(std::string_view text);  // throws ProtocolError

  friend auto operator<=>(const UserId&, const UserId&) = default;
};

/// Secret per-member token, hex encoded. Only used to target links.
using PrivateId = std::string;

inline constexpr std::size_t kMaxUsernameLength = 64;
inline constexpr std::size_t kMaxMessageLength = 500;
inline constexpr int kMaxK = 64;

struct Profile {
  std::string username;
  std::string bio;

  friend bool operator==(const Profile&, const Profile&) = default;
};

struct Signal {
  bool active = false;
  std::string message;  // empty when no message; never non-empty while inactive

  friend bool operator==(const Signal&, const Signal&) = default;
};

struct FractionThreshold {
  double q_reset = 1.0;  // (0, 1]
  friend bool operator==(const FractionThreshold&, const FractionThreshold&) = default;
};

/// Fires when a cycle has lasted `ticks` ticks.
struct Deadline {
  std::uint64_t ticks = 1;
  friend bool operator==(const Deadline&, const Deadline&) = default;
};

struct Manual {
  friend bool operator==(const Manual&, const Manual&) = default;
};

using ResetRule = std::variant<FractionThreshold, Deadline, Manual>;

std::string describe(const ResetRule& rule);

/// The public channel. Immutable once the network exists.
struct GameSpec {
  std::string action;
  std::string reward;
  ResetRule reset_condition = Manual{};

  friend bool operator==(const GameSpec&, const GameSpec&) = default;
};

struct NetworkConfig {
  std::string network_id;  // generated from the seed when empty
  std::uint64_t seed = 0;
  bool forbid_mutual_pairs = true;
  std::optional<std::size_t> capacity;
  bool expose_member_count = false;  // operator-plane experiment flag

  friend bool operator==(const NetworkConfig&, const NetworkConfig&) = default;
};

enum class Phase { Forming, Active };

std::string_view to_string(Phase phase);

struct Member {
  UserId id;
  Profile profile;
  Signal signal;
  PrivateId private_id;
  std::vector<UserId> inputs;  // insertion ordered, distinct

  friend bool operator==(const Member&, const Member&) = default;
};

struct NetworkState {
  std::string network_id;
  int k = 0;
  GameSpec spec;
  NetworkConfig config;
  std::map<UserId, Member> members;
  std::set<UserId> pending_departures;
  std::set<UserId> retired;  // ids of departed members, never reissued
  std::uint64_t tick = 0;
  std::uint64_t cycle = 0;
  std::uint64_t cycle_start_tick = 0;
  Phase phase = Phase::Forming;
  Rng rng;
  std::uint64_t last_seq = 0;

  std::size_t size() const noexcept { return members.size(); }
  const Member* find(UserId id) const;
  const Member* find_by_private_id(std::string_view private_id) const;
  std::size_t active_count() const;

  friend bool operator==(const NetworkState&, const NetworkState&) = default;
};

/// Random sampling, or explicit sources named by private id.
struct LinkRequest {
  std::vector<PrivateId> targets;

  static LinkRequest random() { return {}; }
  static LinkRequest targeted(std::vector<PrivateId> ids) { return {std::move(ids)}; }
  bool is_random() const noexcept { return targets.empty(); }
};

struct Membership {
  UserId user_id;
  PrivateId private_id;
};

/// Validates UTF-8 and returns the number of code points, or nullopt.
std::optional<std::size_t> utf8_length(std::string_view text);

}  // namespace gridt

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gridt/protocol/types.hpp"

namespace gridt {

/// What one input source shows to the viewer.
struct InputCard {
  UserId user_id;
  std::string username;
  std::string bio;
  bool active = false;
  std::string message;

  friend bool operator==(const InputCard&, const InputCard&) = default;
};

/// Everything a member is allowed to see. Holds no private ids, no
/// observer identities, no outdegree and no member count.
struct ViewSnapshot {
  std::string network_id;
  UserId user_id;
  std::string username;
  Signal own;
  GameSpec spec;
  int k = 0;
  Phase phase = Phase::Forming;
  std::vector<InputCard> inputs;
  bool seen = false;
  std::uint64_t tick = 0;
  std::uint64_t cycle = 0;

  friend bool operator==(const ViewSnapshot&, const ViewSnapshot&) = default;
};

/// Builds the snapshot for `user`; throws NotFound for non-members.
ViewSnapshot make_view(const NetworkState& state, UserId user);

/// True iff `user` is active and some active member lists `user` as input.
bool seen_flag(const NetworkState& state, UserId user);

nlohmann::json to_json(const ViewSnapshot& view);

}  // namespace gridt

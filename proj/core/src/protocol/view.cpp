#include "gridt/protocol/view.hpp"

#include <algorithm>

#include "gridt/protocol/errors.hpp"
#include "gridt/protocol/network.hpp"

namespace gridt {

bool seen_flag(const NetworkState& state, UserId user) {
  const Member* self = state.find(user);
  if (self == nullptr || !self->signal.active) return false;
  for (const auto& [id, member] : state.members) {
    if (id == user || !member.signal.active) continue;
    if (std::find(member.inputs.begin(), member.inputs.end(), user) != member.inputs.end()) {
      return true;
    }
  }
  return false;
}

ViewSnapshot make_view(const NetworkState& state, UserId user) {
  const Member* self = state.find(user);
  if (self == nullptr) throw ProtocolError(ErrorCode::NotFound, "unknown user " + user.str());

  ViewSnapshot view;
  view.network_id = state.network_id;
  view.user_id = user;
  view.username = self->profile.username;
  view.own = self->signal;
  view.spec = state.spec;
  view.k = state.k;
  view.phase = state.phase;
  view.tick = state.tick;
  view.cycle = state.cycle;
  view.seen = seen_flag(state, user);
  view.inputs.reserve(self->inputs.size());
  for (UserId source : self->inputs) {
    const Member& m = state.members.at(source);
    view.inputs.push_back(InputCard{source, m.profile.username, m.profile.bio, m.signal.active,
                                    m.signal.message});
  }
  return view;
}

nlohmann::json to_json(const ViewSnapshot& view) {
  auto inputs = nlohmann::json::array();
  for (const auto& card : view.inputs) {
    inputs.push_back({
        {"user_id", card.user_id.str()},
        {"username", card.username},
        {"bio", card.bio},
        {"signal", card.active ? 1 : 0},
        {"message", card.message},
    });
  }
  return {
      {"network_id", view.network_id},
      {"user_id", view.user_id.str()},
      {"username", view.username},
      {"signal", view.own.active ? 1 : 0},
      {"message", view.own.message},
      {"game_spec", to_json(view.spec)},
      {"k", view.k},
      {"phase", to_string(view.phase)},
      {"inputs", std::move(inputs)},
      {"seen", view.seen},
      {"tick", view.tick},
      {"cycle", view.cycle},
  };
}

}  // namespace gridt

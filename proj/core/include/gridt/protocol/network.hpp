#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gridt/protocol/errors.hpp"
#include "gridt/protocol/event.hpp"
#include "gridt/protocol/types.hpp"
#include "gridt/protocol/view.hpp"

namespace gridt {

enum class ResetReason { Threshold, Deadline, Manual };

std::string_view to_string(ResetReason reason);

struct ResetOutcome {
  bool fired = false;
  std::optional<ResetReason> reason;
  std::size_t departed = 0;
  std::size_t repaired = 0;

  explicit operator bool() const noexcept { return fired; }
};

/// The protocol state machine.
///
/// Every mutation is validated first, then committed as one or more events;
/// the state is only ever changed by applying events. A rejected call throws
/// ProtocolError and leaves both state and log untouched. The class is not
/// synchronized: callers serialize mutations per network.
class Network {
 public:
  static Network create(int k, GameSpec spec, NetworkConfig config = {});

  /// Rebuilds a network by applying `log` from empty. The log must start
  /// with a Created event and have gapless, increasing sequence numbers.
  static Network replay(std::span<const Event> log);

  Membership join(const Profile& profile, const LinkRequest& request = LinkRequest::random());

  /// Sets the signal to 1 (no-op if already 1) and attaches `message` when
  /// non-empty.
  ViewSnapshot activate_signal(UserId user, std::optional<std::string> message = std::nullopt);

  /// Replaces the message of an already active signal; an empty message
  /// clears it.
  ViewSnapshot set_message(UserId user, std::string message);

  /// Swaps input `drop` for a random source, or for the member holding the
  /// given private id.
  ViewSnapshot rewire(UserId user, UserId drop, std::optional<PrivateId> add = std::nullopt);

  void request_leave(UserId user);

  /// Evaluates the reset rule and fires the reset when it is satisfied.
  /// A Manual rule never fires here; see trigger_reset.
  ResetOutcome check_reset();

  /// Fires a reset unconditionally (the explicit trigger).
  ResetOutcome trigger_reset();

  /// Advances the clock by one tick, then evaluates the reset rule.
  ResetOutcome tick();

  ViewSnapshot view(UserId user) const { return make_view(state_, user); }

  const NetworkState& state() const noexcept { return state_; }
  const std::vector<Event>& events() const noexcept { return log_; }

  /// Events with seq > `seq`.
  std::span<const Event> events_since(std::uint64_t seq) const;

 private:
  Network() = default;

  void commit(EventKind kind, nlohmann::json payload);
  ResetOutcome fire_reset(ResetReason reason);
  bool reset_due() const;
  std::vector<UserId> sample(std::vector<UserId> candidates, std::size_t count);
  const Member& require_member(UserId user) const;

  NetworkState state_;
  std::vector<Event> log_;
};

/// Applies one event to `state`. Throws std::invalid_argument when the event
/// is inconsistent with the state.
void apply_event(NetworkState& state, const Event& event);

/// Describes every violated structural invariant of `state`; empty when the
/// state is consistent. Mutual pairs are not checked here (see LogVerifier).
std::vector<std::string> check_invariants(const NetworkState& state);

nlohmann::json to_json(const NetworkState& state);
nlohmann::json to_json(const GameSpec& spec);
GameSpec game_spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const NetworkConfig& config);
NetworkConfig network_config_from_json(const nlohmann::json& j);

}  // namespace gridt

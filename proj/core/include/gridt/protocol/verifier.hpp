#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gridt/protocol/event.hpp"
#include "gridt/protocol/types.hpp"

namespace gridt {

/// Streams a log through apply_event and checks, at every operation
/// boundary, the structural invariants plus the rules only visible in the
/// log itself: gapless seq, rewires only while active, resets that clear
/// every signal, and no sampled link closing a 2-cycle.
class LogVerifier {
 public:
  /// Returns the violations attributable to this event (possibly none).
  std::vector<std::string> feed(const Event& event);

  /// Final boundary check.
  std::vector<std::string> finish() const;

  const std::optional<NetworkState>& state() const noexcept { return state_; }
  std::size_t events_seen() const noexcept { return count_; }

 private:
  std::optional<NetworkState> state_;
  std::size_t count_ = 0;
};

struct VerifyReport {
  std::size_t events = 0;
  std::vector<std::string> violations;
  std::optional<NetworkState> state;

  bool ok() const noexcept { return violations.empty() && state.has_value(); }
};

VerifyReport verify_log(std::span<const Event> log);

}  // namespace gridt

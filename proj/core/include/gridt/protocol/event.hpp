#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace gridt {

enum class EventKind {
  Created,
  Joined,
  Linked,
  Rewired,
  SignalOn,
  MessageSet,
  LeaveRequested,
  Reset,
  Departed,
  LinkRepaired,
  Ticked,
};

std::string_view to_string(EventKind kind);
std::optional<EventKind> parse_event_kind(std::string_view name);

/// True for kinds that open a new operation. Core invariants hold at every
/// such boundary; continuation events (Linked, Departed, LinkRepaired) may
/// pass through intermediate states.
bool opens_operation(EventKind kind);

/// One append-only log record. Payloads carry outcomes, not intents, so
/// applying them needs no randomness.
struct Event {
  std::uint64_t seq = 0;
  std::uint64_t tick = 0;
  EventKind kind = EventKind::Created;
  nlohmann::json payload = nlohmann::json::object();

  friend bool operator==(const Event&, const Event&) = default;
};

nlohmann::json to_json(const Event& event);
Event event_from_json(const nlohmann::json& j);

/// Single-line JSON rendering without trailing newline.
std::string to_line(const Event& event);

/// Log file helpers: one JSON object per line, LF terminated.
void write_log(std::ostream& out, const std::vector<Event>& events);
std::vector<Event> read_log(std::istream& in);
std::vector<Event> read_log_file(const std::string& path);

/// Reads `in` up to the last LF-terminated line. An unterminated final
/// line is a torn append and is reported rather than parsed; any other bad
/// line still throws.
struct LogPrefix {
  std::vector<Event> events;
  std::uint64_t valid_bytes = 0;  // bytes covered by `events`
  bool torn_tail = false;
};
LogPrefix read_log_prefix(std::istream& in);

}  // namespace gridt

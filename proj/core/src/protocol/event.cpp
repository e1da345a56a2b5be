#include "gridt/protocol/event.hpp"

#include <array>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <utility>

namespace gridt {
namespace {

constexpr std::array<std::pair<EventKind, std::string_view>, 11> kKindNames{{
    {EventKind::Created, "Created"},
    {EventKind::Joined, "Joined"},
    {EventKind::Linked, "Linked"},
    {EventKind::Rewired, "Rewired"},
    {EventKind::SignalOn, "SignalOn"},
    {EventKind::MessageSet, "MessageSet"},
    {EventKind::LeaveRequested, "LeaveRequested"},
    {EventKind::Reset, "Reset"},
    {EventKind::Departed, "Departed"},
    {EventKind::LinkRepaired, "LinkRepaired"},
    {EventKind::Ticked, "Ticked"},
}};

}  // namespace

std::string_view to_string(EventKind kind) {
  for (const auto& [k, name] : kKindNames) {
    if (k == kind) return name;
  }
  return "Unknown";
}

std::optional<EventKind> parse_event_kind(std::string_view name) {
  for (const auto& [k, n] : kKindNames) {
    if (n == name) return k;
  }
  return std::nullopt;
}

bool opens_operation(EventKind kind) {
  switch (kind) {
    case EventKind::Linked:
    case EventKind::Departed:
    case EventKind::LinkRepaired:
      return false;
    default:
      return true;
  }
}

nlohmann::json to_json(const Event& event) {
  return {
      {"seq", event.seq},
      {"tick", event.tick},
      {"kind", to_string(event.kind)},
      {"payload", event.payload},
  };
}

Event event_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("event is not a JSON object");
  Event event;
  event.seq = j.at("seq").get<std::uint64_t>();
  event.tick = j.at("tick").get<std::uint64_t>();
  const auto name = j.at("kind").get<std::string>();
  const auto kind = parse_event_kind(name);
  if (!kind) throw std::invalid_argument("unknown event kind: " + name);
  event.kind = *kind;
  event.payload = j.at("payload");
  if (!event.payload.is_object()) throw std::invalid_argument("event payload is not an object");
  return event;
}

std::string to_line(const Event& event) { return to_json(event).dump(); }

void write_log(std::ostream& out, const std::vector<Event>& events) {
  for (const auto& event : events) out << to_line(event) << '\n';
}

std::vector<Event> read_log(std::istream& in) {
  std::vector<Event> events;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    try {
      events.push_back(event_from_json(nlohmann::json::parse(line)));
    } catch (const std::exception& e) {
      throw std::invalid_argument("log line " + std::to_string(number) + ": " + e.what());
    }
  }
  return events;
}

LogPrefix read_log_prefix(std::istream& in) {
  LogPrefix out;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (in.eof()) {  // no terminating LF
      out.torn_tail = !line.empty();
      break;
    }
    if (!line.empty()) {
      try {
        out.events.push_back(event_from_json(nlohmann::json::parse(line)));
      } catch (const std::exception& e) {
        throw std::invalid_argument("log line " + std::to_string(number) + ": " + e.what());
      }
    }
    out.valid_bytes += line.size() + 1;
  }
  return out;
}

std::vector<Event> read_log_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open log " + path);
  return read_log(in);
}

}  // namespace gridt

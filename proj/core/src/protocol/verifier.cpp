#include "gridt/protocol/verifier.hpp"

#include <algorithm>
#include <stdexcept>

#include "gridt/protocol/network.hpp"

namespace gridt {
namespace {

bool lists(const NetworkState& state, UserId observer, UserId source) {
  const Member* m = state.find(observer);
  return m != nullptr && std::find(m->inputs.begin(), m->inputs.end(), source) != m->inputs.end();
}

std::string where(const Event& event) {
  return "seq " + std::to_string(event.seq) + " " + std::string(to_string(event.kind)) + ": ";
}

}  // namespace

std::vector<std::string> LogVerifier::feed(const Event& event) {
  std::vector<std::string> out;
  ++count_;

  if (!state_) {
    if (event.kind != EventKind::Created) {
      out.push_back(where(event) + "log does not start with Created");
      return out;
    }
    state_.emplace();
  } else if (opens_operation(event.kind)) {
    for (auto& v : check_invariants(*state_)) out.push_back(where(event) + "before: " + v);
  }

  NetworkState& s = *state_;
  const auto& p = event.payload;
  const bool forbid = s.config.forbid_mutual_pairs;

  // Pre-apply view of links the event is about to create.
  std::vector<std::pair<UserId, UserId>> created;  // (observer, source)
  try {
    switch (event.kind) {
      case EventKind::Linked:
        if (p.value("mode", "") == "sampled") {
          const auto user = UserId::parse(p.at("user_id").get<std::string>());
          for (const auto& src : p.at("sources")) {
            created.emplace_back(user, UserId::parse(src.get<std::string>()));
          }
        }
        break;
      case EventKind::Rewired:
        created.emplace_back(UserId::parse(p.at("user_id").get<std::string>()),
                             UserId::parse(p.at("added").get<std::string>()));
        break;
      case EventKind::LinkRepaired:
        if (p.value("mode", "") == "sampled") {
          created.emplace_back(UserId::parse(p.at("user_id").get<std::string>()),
                               UserId::parse(p.at("source").get<std::string>()));
        }
        break;
      default:
        break;
    }
  } catch (const std::exception& e) {
    out.push_back(where(event) + "malformed payload: " + e.what());
  }
  if (forbid) {
    for (const auto& [observer, source] : created) {
      if (lists(s, source, observer)) out.push_back(where(event) + "link closes a mutual pair");
    }
  }

  try {
    apply_event(s, event);
  } catch (const std::exception& e) {
    out.push_back(e.what());
    return out;
  }

  if (event.kind == EventKind::Reset) {
    for (const auto& [id, m] : s.members) {
      if (m.signal.active || !m.signal.message.empty()) {
        out.push_back(where(event) + "signal survived reset");
        break;
      }
    }
  }
  return out;
}

std::vector<std::string> LogVerifier::finish() const {
  if (!state_) return {"empty log"};
  return check_invariants(*state_);
}

VerifyReport verify_log(std::span<const Event> log) {
  LogVerifier verifier;
  VerifyReport report;
  for (const auto& event : log) {
    auto v = verifier.feed(event);
    report.violations.insert(report.violations.end(), v.begin(), v.end());
    if (!verifier.state()) break;
  }
  auto tail = verifier.finish();
  report.violations.insert(report.violations.end(), tail.begin(), tail.end());
  report.events = verifier.events_seen();
  report.state = verifier.state();
  return report;
}

}  // namespace gridt

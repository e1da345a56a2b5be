#include "gridt/protocol/types.hpp"

#include <charconv>
#include <cstdio>

#include "gridt/protocol/errors.hpp"

namespace gridt {

std::string UserId::str() const {
  char buffer[17];
  std::snprintf(buffer, sizeof buffer, "%016llx", static_cast<unsigned long long>(value));
  return buffer;
}

UserId UserId::parse(std::string_view text) {
  UserId id;
  if (text.size() != 16) {
    throw ProtocolError(ErrorCode::InvalidInput, "malformed user id");
  }
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), id.value, 16);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ProtocolError(ErrorCode::InvalidInput, "malformed user id");
  }
  return id;
}

std::string describe(const ResetRule& rule) {
  struct Visitor {
    std::string operator()(const FractionThreshold& r) const {
      char buffer[64];
      std::snprintf(buffer, sizeof buffer, "reset when at least %.4g of members are active",
                    r.q_reset);
      return buffer;
    }
    std::string operator()(const Deadline& r) const {
      return "reset every " + std::to_string(r.ticks) + " ticks";
    }
    std::string operator()(const Manual&) const { return "reset on operator trigger"; }
  };
  return std::visit(Visitor{}, rule);
}

std::string_view to_string(Phase phase) {
  return phase == Phase::Active ? "active" : "forming";
}

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotFound: return "NOT_FOUND";
    case ErrorCode::InvalidInput: return "INVALID_INPUT";
    case ErrorCode::RewireLocked: return "REWIRE_LOCKED";
    case ErrorCode::Conflict: return "CONFLICT";
  }
  return "UNKNOWN";
}

const Member* NetworkState::find(UserId id) const {
  auto it = members.find(id);
  return it == members.end() ? nullptr : &it->second;
}

const Member* NetworkState::find_by_private_id(std::string_view private_id) const {
  for (const auto& [id, member] : members) {
    if (member.private_id == private_id) return &member;
  }
  return nullptr;
}

std::size_t NetworkState::active_count() const {
  std::size_t n = 0;
  for (const auto& [id, member] : members) n += member.signal.active ? 1 : 0;
  return n;
}

std::optional<std::size_t> utf8_length(std::string_view text) {
  std::size_t count = 0;
  for (std::size_t i = 0; i < text.size();) {
    const auto lead = static_cast<unsigned char>(text[i]);
    std::size_t extra = 0;
    std::uint32_t cp = 0;
    if (lead < 0x80) {
      cp = lead;
    } else if ((lead & 0xE0) == 0xC0) {
      extra = 1;
      cp = lead & 0x1F;
    } else if ((lead & 0xF0) == 0xE0) {
      extra = 2;
      cp = lead & 0x0F;
    } else if ((lead & 0xF8) == 0xF0) {
      extra = 3;
      cp = lead & 0x07;
    } else {
      return std::nullopt;
    }
    if (i + extra >= text.size() && extra > 0) return std::nullopt;
    for (std::size_t j = 1; j <= extra; ++j) {
      const auto byte = static_cast<unsigned char>(text[i + j]);
      if ((byte & 0xC0) != 0x80) return std::nullopt;
      cp = (cp << 6) | (byte & 0x3F);
    }
    // Overlong forms, surrogates and out-of-range code points.
    static constexpr std::uint32_t kMin[] = {0, 0x80, 0x800, 0x10000};
    if (cp < kMin[extra] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
      return std::nullopt;
    }
    i += extra + 1;
    ++count;
  }
  return count;
}

}  // namespace gridt

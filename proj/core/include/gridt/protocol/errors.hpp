#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gridt {

enum class ErrorCode {
  NotFound,
  InvalidInput,
  RewireLocked,
  Conflict,
};

std::string_view to_string(ErrorCode code);

/// Rejection of a protocol operation. A rejected operation appends no event.
class ProtocolError : public std::runtime_error {
 public:
  ProtocolError(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace gridt

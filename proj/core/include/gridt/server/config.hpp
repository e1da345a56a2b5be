#pragma once

#include <cstdint>
#include <istream>
#include <string>

namespace gridt::server {

/// Key-value configuration, one `key = value` per line, `#` comments.
struct ServerConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string data_dir = "gridt-data";
  double tick_seconds = 60.0;  // 0 disables the clock
  bool forbid_mutual_pairs = true;
  std::string operator_token;  // generated at startup when empty
  double long_poll_seconds = 30.0;
  int threads = 64;
};

/// Throws std::invalid_argument naming the offending line.
ServerConfig parse_server_config(std::istream& in);
ServerConfig load_server_config(const std::string& path);

}  // namespace gridt::server

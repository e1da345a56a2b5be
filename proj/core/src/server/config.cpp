#include "gridt/server/config.hpp"

#include <fstream>
#include <stdexcept>

#include "gridt/csv.hpp"

namespace gridt::server {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool parse_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw std::invalid_argument("expected a boolean, got " + v);
}

int parse_int(const std::string& v, int lo, int hi) {
  std::size_t used = 0;
  const int x = std::stoi(v, &used);
  if (used != v.size() || x < lo || x > hi) throw std::invalid_argument("integer out of range: " + v);
  return x;
}

}  // namespace

ServerConfig parse_server_config(std::istream& in) {
  ServerConfig c;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(number) + ": expected key = value");
    }
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    try {
      if (key == "listen") {
        const auto colon = value.rfind(':');
        if (colon == std::string::npos) throw std::invalid_argument("listen must be host:port");
        c.host = value.substr(0, colon);
        c.port = parse_int(value.substr(colon + 1), 0, 65535);
      } else if (key == "host") {
        c.host = value;
      } else if (key == "port") {
        c.port = parse_int(value, 0, 65535);
      } else if (key == "data_dir") {
        if (value.empty()) throw std::invalid_argument("data_dir must not be empty");
        c.data_dir = value;
      } else if (key == "tick_seconds") {
        c.tick_seconds = parse_double(value);
        if (c.tick_seconds < 0) throw std::invalid_argument("tick_seconds must be >= 0");
      } else if (key == "forbid_mutual_pairs") {
        c.forbid_mutual_pairs = parse_bool(value);
      } else if (key == "operator_token") {
        c.operator_token = value;
      } else if (key == "long_poll_seconds") {
        c.long_poll_seconds = parse_double(value);
        if (c.long_poll_seconds < 0) throw std::invalid_argument("long_poll_seconds must be >= 0");
      } else if (key == "threads") {
        c.threads = parse_int(value, 1, 1024);
      } else {
        throw std::invalid_argument("unknown key " + key);
      }
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("config line " + std::to_string(number) + ": " + e.what());
    } catch (const std::out_of_range&) {
      throw std::invalid_argument("config line " + std::to_string(number) + ": value out of range");
    }
  }
  return c;
}

ServerConfig load_server_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read config " + path);
  return parse_server_config(in);
}

}  // namespace gridt::server

// gridt: server, analytics sweeps, dynamics experiments and log replay.

#include <CLI11.hpp>

#include <csignal>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>

#include "gridt/analytics/export.hpp"
#include "gridt/analytics/influence.hpp"
#include "gridt/analytics/outdegree.hpp"
#include "gridt/csv.hpp"
#include "gridt/dynamics/sweep.hpp"
#include "gridt/protocol/network.hpp"
#include "gridt/protocol/verifier.hpp"
#include "gridt/server/config.hpp"
#include "gridt/server/http.hpp"

namespace {

enum Exit { kOk = 0, kBadArgs = 1, kRuntime = 2, kVerify = 3 };

struct VerifyFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::uint64_t resolve_seed(std::optional<std::uint64_t>& seed) {
  if (!seed) {
    std::random_device device;
    seed = (static_cast<std::uint64_t>(device()) << 32) | device();
    std::cerr << "seed: " << *seed << "\n";
  }
  return *seed;
}

void emit_csv(const std::string& path, const gridt::CsvTable& table) {
  if (path.empty() || path == "-") {
    gridt::write_csv(std::cout, table);
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  gridt::write_csv(out, table);
  if (!out.flush()) throw std::runtime_error("write failed: " + path);
}

void emit_json(const std::string& path, const nlohmann::json& j) {
  if (path.empty()) return;
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << "\n";
}

// Sidecar next to the CSV: run.csv -> run.json.
std::string sidecar_for(const std::string& csv_path) {
  if (csv_path.empty() || csv_path == "-") return {};
  auto dot = csv_path.rfind('.');
  auto slash = csv_path.rfind('/');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return csv_path + ".json";
  return csv_path.substr(0, dot) + ".json";
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) out.push_back(gridt::parse_double(item));
  if (out.empty()) throw std::invalid_argument("empty list");
  return out;
}

gridt::server::HttpServer* g_server = nullptr;

extern "C" void on_stop_signal(int) {
  if (g_server) g_server->stop();
}

int serve(const std::string& config_path, std::optional<int> port) {
  auto config = gridt::server::load_server_config(config_path);
  if (port) config.port = *port;
  gridt::server::ServiceOptions options{config.data_dir, config.forbid_mutual_pairs, config.operator_token,
                                        config.long_poll_seconds};
  gridt::server::Service service(options);
  const auto recovered = service.recover();
  std::cerr << "recovered " << recovered.networks << " networks, " << recovered.events << " events, "
            << recovered.sessions << " sessions";
  if (recovered.torn_tails) std::cerr << ", trimmed " << recovered.torn_tails << " torn logs";
  std::cerr << "\n";
  if (config.operator_token.empty()) std::cerr << "operator token: " << service.options().operator_token << "\n";

  gridt::server::HttpServer http(service, config.threads);
  const int bound = http.bind(config.host, config.port);
  if (bound < 0) throw std::runtime_error("cannot bind " + config.host + ":" + std::to_string(config.port));
  std::cerr << "listening on " << config.host << ":" << bound << "\n";
  service.start_clock(config.tick_seconds);
  g_server = &http;
  std::signal(SIGINT, on_stop_signal);
  std::signal(SIGTERM, on_stop_signal);
  http.run();
  g_server = nullptr;
  service.stop();
  return kOk;
}

int replay(const std::string& path, bool verify, const std::string& state_out) {
  const auto log = gridt::read_log_file(path);
  if (verify) {
    const auto report = gridt::verify_log(log);
    for (const auto& v : report.violations) std::cerr << "violation: " << v << "\n";
    if (!report.ok()) throw VerifyFailure(std::to_string(report.violations.size()) + " violations");
    std::cerr << "verified " << report.events << " events\n";
  }
  const auto net = gridt::Network::replay(log);
  const auto& s = net.state();
  std::cout << "network " << s.network_id << ": " << log.size() << " events, " << s.size() << " members, K="
            << s.k << ", phase " << gridt::to_string(s.phase) << ", cycle " << s.cycle << ", tick " << s.tick
            << "\n";
  emit_json(state_out, gridt::to_json(s));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gridt coordination networks: server, analytics and simulations"};
  app.require_subcommand(1);

  // serve
  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP API server");
  std::string config_path;
  std::optional<int> port;
  serve_cmd->add_option("--config", config_path, "Key-value config file")->required()->check(CLI::ExistingFile);
  serve_cmd->add_option("--port", port, "Override the configured port");

  // analyze
  auto* analyze = app.add_subcommand("analyze", "Closed-form analytics");
  analyze->require_subcommand(1);
  auto* ksweep = analyze->add_subcommand("ksweep", "Expected influence and empty-outdegree limit per K");
  int k_min = 1, k_max = 12;
  double cap = gridt::analytics::kDefaultPEmptyCap;
  std::string conditioning = "exclude";
  std::string out, json_out;
  ksweep->add_option("--k-min", k_min)->check(CLI::Range(1, 64));
  ksweep->add_option("--k-max", k_max)->check(CLI::Range(1, 64));
  ksweep->add_option("--cap", cap, "Largest admissible P_empty limit")->check(CLI::Range(0.0, 1.0));
  ksweep->add_option("--others", conditioning, "Other-input distribution: exclude or include the sender")
      ->check(CLI::IsMember({"exclude", "include"}));
  ksweep->add_option("--out", out, "CSV path, stdout when omitted");
  ksweep->add_option("--json", json_out, "Also write the table as JSON");

  auto* outdeg = analyze->add_subcommand("outdegree", "Outdegree histogram of sampled K-in graphs");
  std::uint64_t n_nodes = 12, samples = 100000;
  int k = 4;
  std::optional<std::uint64_t> seed;
  outdeg->add_option("--n", n_nodes)->check(CLI::PositiveNumber);
  outdeg->add_option("--k", k)->check(CLI::Range(1, 64));
  outdeg->add_option("--samples", samples)->check(CLI::PositiveNumber);
  outdeg->add_option("--seed", seed);
  outdeg->add_option("--out", out);
  outdeg->add_option("--json", json_out);

  // sim
  auto* sim = app.add_subcommand("sim", "Dynamics experiments");
  sim->require_subcommand(1);
  unsigned threads = 0;
  std::size_t runs = 50;
  double bias = 0.5;
  std::uint64_t steps = gridt::dynamics::kDefaultMaxSteps, damage_steps = 100;
  std::string series_out;

  auto* kauffman = sim->add_subcommand("kauffman", "Attractor and damage surveys of random boolean networks");
  std::size_t n_size = 100;
  kauffman->add_option("--n", n_size)->check(CLI::PositiveNumber);
  kauffman->add_option("--k", k)->check(CLI::Range(1, gridt::dynamics::kMaxBooleanK));
  kauffman->add_option("--bias", bias)->check(CLI::Range(0.0, 1.0));
  kauffman->add_option("--steps", steps, "Attractor search bound")->check(CLI::PositiveNumber);
  kauffman->add_option("--damage-steps", damage_steps)->check(CLI::PositiveNumber);
  kauffman->add_option("--runs", runs)->check(CLI::PositiveNumber);
  kauffman->add_option("--seed", seed);
  kauffman->add_option("--threads", threads, "0 = hardware concurrency");
  kauffman->add_option("--out", out, "Per-run CSV; metadata goes next to it as .json");
  kauffman->add_option("--series-out", series_out, "Damage distance per run and step");

  auto* agents = sim->add_subcommand("agents", "Agent cascades on a live protocol network");
  std::size_t agents_n = 20;
  int agents_k = 4;
  std::string policy = "committed:0.25,threshold1:0.75", reset = "frac:0.8";
  std::uint64_t ticks = 200;
  std::size_t agent_runs = 100;
  bool allow_mutual = false;
  std::string ticks_out;
  agents->add_option("--n", agents_n)->check(CLI::PositiveNumber);
  agents->add_option("--k", agents_k)->check(CLI::Range(1, 64));
  agents->add_option("--policy", policy, "name:fraction,... with committed, threshold<t>, thresholdK, bayesian<c>");
  agents->add_option("--reset", reset, "frac:<q>, deadline:<ticks> or manual");
  agents->add_option("--ticks", ticks)->check(CLI::PositiveNumber);
  agents->add_option("--runs", agent_runs)->check(CLI::PositiveNumber);
  agents->add_option("--seed", seed);
  agents->add_option("--threads", threads);
  agents->add_flag("--allow-mutual-pairs", allow_mutual);
  agents->add_option("--out", out, "Per-run CSV; metadata goes next to it as .json");
  agents->add_option("--ticks-out", ticks_out, "Per-tick CSV");

  auto* phase = sim->add_subcommand("phase", "Order/chaos grid over K and bias");
  gridt::dynamics::PhaseSweepConfig phase_config;
  std::string biases = "0.5";
  phase->add_option("--k-min", phase_config.k_min)->check(CLI::Range(1, gridt::dynamics::kMaxBooleanK));
  phase->add_option("--k-max", phase_config.k_max)->check(CLI::Range(1, gridt::dynamics::kMaxBooleanK));
  phase->add_option("--bias", biases, "Comma-separated bias values");
  phase->add_option("--n", phase_config.n)->check(CLI::PositiveNumber);
  phase->add_option("--runs", phase_config.runs)->check(CLI::PositiveNumber);
  phase->add_option("--max-steps", phase_config.max_steps)->check(CLI::PositiveNumber);
  phase->add_option("--damage-steps", phase_config.damage_steps)->check(CLI::PositiveNumber);
  phase->add_option("--seed", seed);
  phase->add_option("--threads", threads);
  phase->add_option("--out", out);

  // replay
  auto* replay_cmd = app.add_subcommand("replay", "Rebuild state from an event log");
  std::string log_path, state_out;
  bool verify = false;
  replay_cmd->add_option("--log", log_path)->required();
  replay_cmd->add_flag("--verify", verify, "Re-check every invariant at every event");
  replay_cmd->add_option("--state-out", state_out, "Write the rebuilt state as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kBadArgs;
  }

  try {
    if (*serve_cmd) return serve(config_path, port);
    if (*replay_cmd) return replay(log_path, verify, state_out);

    if (*ksweep) {
      const auto mode = conditioning == "include" ? gridt::analytics::OtherInputs::IncludeSender
                                                  : gridt::analytics::OtherInputs::ExcludeSender;
      const auto table = gridt::analytics::k_sweep(k_min, k_max, cap, mode);
      emit_csv(out, gridt::analytics::to_csv(table));
      emit_json(json_out, gridt::analytics::to_json(table));
      if (table.optimal_k) {
        std::cerr << "admissible max K = " << *table.optimal_k << "\n";
      } else {
        std::cerr << "no admissible K under cap " << cap << "\n";
      }
      return kOk;
    }
    if (*outdeg) {
      const auto hist = gridt::analytics::outdegree_histogram(n_nodes, k, samples, resolve_seed(seed));
      emit_csv(out, gridt::analytics::to_csv(hist));
      emit_json(json_out, gridt::analytics::to_json(hist));
      std::cerr << "zero-outdegree fraction " << hist.zero_fraction() << " +- "
                << hist.zero_fraction_standard_error() << " (exact " << gridt::analytics::p_empty(n_nodes, k)
                << ")\n";
      return kOk;
    }
    if (*kauffman) {
      const auto s = resolve_seed(seed);
      const auto att = gridt::dynamics::attractor_survey(n_size, k, bias, runs, s, steps, threads);
      const auto dmg = gridt::dynamics::damage_survey(n_size, k, bias, damage_steps, runs, s, threads);
      emit_csv(out, gridt::dynamics::kauffman_csv(att, dmg));
      if (!series_out.empty()) emit_csv(series_out, gridt::dynamics::to_csv(dmg));
      const auto meta = gridt::dynamics::metadata(att, dmg);
      emit_json(sidecar_for(out), meta);
      std::cerr << "median cycle " << meta["median_cycle"].dump() << ", truncated "
                << att.truncated_fraction() << ", final distance " << dmg.mean_final_distance() << "\n";
      return kOk;
    }
    if (*agents) {
      gridt::dynamics::RunConfig rc;
      rc.n = agents_n;
      rc.k = agents_k;
      rc.mix = gridt::dynamics::parse_policy_mix(policy, agents_k);
      rc.reset = gridt::dynamics::parse_reset_rule(reset);
      rc.ticks = ticks;
      rc.runs = agent_runs;
      rc.seed = resolve_seed(seed);
      rc.forbid_mutual_pairs = !allow_mutual;
      const auto report = gridt::dynamics::run_agents(rc, threads);
      emit_csv(out, gridt::dynamics::runs_csv(report));
      if (!ticks_out.empty()) emit_csv(ticks_out, gridt::dynamics::ticks_csv(report));
      emit_json(sidecar_for(out), gridt::dynamics::metadata(report));
      std::cerr << "coordination success " << report.success_rate() * 100.0 << "%\n";
      return kOk;
    }
    if (*phase) {
      phase_config.biases = parse_list(biases);
      phase_config.seed = resolve_seed(seed);
      const auto cells = gridt::dynamics::phase_sweep(phase_config, threads);
      emit_csv(out, gridt::dynamics::to_csv(cells));
      emit_json(sidecar_for(out), gridt::dynamics::metadata(phase_config));
      return kOk;
    }
  } catch (const VerifyFailure& e) {
    std::cerr << "verification failed: " << e.what() << "\n";
    return kVerify;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid argument: " << e.what() << "\n";
    return kBadArgs;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntime;
  }
  return kBadArgs;
}

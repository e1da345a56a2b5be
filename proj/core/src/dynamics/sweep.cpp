#include "gridt/dynamics/sweep.hpp"

#include <cmath>
#include <stdexcept>

#include "gridt/protocol/network.hpp"
#include "gridt/rng.hpp"

namespace gridt::dynamics {
namespace {

std::string format_cycle(double v) { return std::isinf(v) ? "inf" : format_double(v); }

nlohmann::json json_number(double v) {
  if (std::isfinite(v)) return v;
  return std::isinf(v) ? nlohmann::json("inf") : nlohmann::json(nullptr);
}

constexpr const char* kSynchronous = "synchronous";
constexpr const char* kAgentOrder = "random permutation per tick";

}  // namespace

std::vector<PhaseCell> phase_sweep(const PhaseSweepConfig& config, unsigned threads) {
  if (config.k_min < 1 || config.k_max < config.k_min || config.k_max > kMaxBooleanK) {
    throw std::invalid_argument("phase_sweep: invalid K range");
  }
  if (config.biases.empty()) throw std::invalid_argument("phase_sweep: no bias values");
  for (double p : config.biases) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("phase_sweep: bias outside [0, 1]");
  }
  std::vector<PhaseCell> cells;
  std::uint64_t index = 0;
  for (int k = config.k_min; k <= config.k_max; ++k) {
    for (double p : config.biases) {
      const auto cell_seed = Rng::derive(config.seed, index++);
      const auto att = attractor_survey(config.n, k, p, config.runs, cell_seed, config.max_steps, threads);
      const auto dmg = damage_survey(config.n, k, p, config.damage_steps, config.runs, cell_seed, threads);
      cells.push_back({k, p, att.median_cycle(), att.truncated_fraction(), dmg.growth_factor(),
                       dmg.mean_final_distance()});
    }
  }
  return cells;
}

CsvTable to_csv(const AttractorReport& report) {
  CsvTable csv;
  csv.header = {"run", "transient", "cycle", "truncated", "steps"};
  for (std::size_t i = 0; i < report.runs.size(); ++i) {
    const auto& r = report.runs[i];
    csv.rows.push_back({std::to_string(i), std::to_string(r.transient), std::to_string(r.cycle),
                        r.truncated ? "true" : "false", std::to_string(r.steps)});
  }
  return csv;
}

CsvTable kauffman_csv(const AttractorReport& attractors, const DamageReport& damage) {
  if (attractors.runs.size() != damage.distance.size()) throw std::invalid_argument("kauffman_csv: run counts differ");
  auto csv = to_csv(attractors);
  csv.header.push_back("final_distance");
  csv.header.push_back("growth_factor");
  for (std::size_t i = 0; i < csv.rows.size(); ++i) {
    const auto& d = damage.distance[i];
    csv.rows[i].push_back(format_double(d.back()));
    csv.rows[i].push_back(format_double(d[1] / d[0]));
  }
  return csv;
}

CsvTable to_csv(const DamageReport& report) {
  CsvTable csv;
  csv.header = {"run", "t", "distance"};
  for (std::size_t i = 0; i < report.distance.size(); ++i) {
    for (std::size_t t = 0; t < report.distance[i].size(); ++t) {
      csv.rows.push_back({std::to_string(i), std::to_string(t), format_double(report.distance[i][t])});
    }
  }
  return csv;
}

CsvTable to_csv(const std::vector<PhaseCell>& cells) {
  CsvTable csv;
  csv.header = {"k", "bias", "median_cycle", "truncated_fraction", "growth_factor", "final_distance"};
  for (const auto& c : cells) {
    csv.rows.push_back({std::to_string(c.k), format_double(c.bias), format_cycle(c.median_cycle),
                        format_double(c.truncated_fraction), format_double(c.growth_factor),
                        format_double(c.final_distance)});
  }
  return csv;
}

CsvTable runs_csv(const AgentReport& report) {
  CsvTable csv;
  csv.header = {"run", "seed", "coordinated", "first_threshold_reset", "resets", "final_q"};
  for (const auto& r : report.runs) {
    csv.rows.push_back({std::to_string(r.run), std::to_string(r.seed), r.coordinated() ? "true" : "false",
                        r.first_threshold_reset ? std::to_string(*r.first_threshold_reset) : "",
                        std::to_string(r.resets), r.trace.empty() ? "0" : format_double(r.trace.back().q)});
  }
  return csv;
}

CsvTable ticks_csv(const AgentReport& report) {
  CsvTable csv;
  csv.header = {"run", "tick", "q", "reset"};
  for (const auto& r : report.runs) {
    for (const auto& t : r.trace) {
      csv.rows.push_back({std::to_string(r.run), std::to_string(t.tick), format_double(t.q),
                          t.reset ? std::string(to_string(*t.reset)) : ""});
    }
  }
  return csv;
}

nlohmann::json metadata(const AttractorReport& attractors, const DamageReport& damage) {
  return {{"experiment", "kauffman"},
          {"n", attractors.n},
          {"k", attractors.k},
          {"bias", attractors.bias},
          {"runs", attractors.runs.size()},
          {"max_steps", attractors.max_steps},
          {"damage_steps", damage.steps},
          {"seed", attractors.seed},
          {"run_seeds", "derive(seed, run); network derive(run_seed, 0), state derive(run_seed, 1)"},
          {"update", kSynchronous},
          {"perturbation", "single bit flip, distance normalized by N"},
          {"median_cycle", json_number(attractors.median_cycle())},
          {"truncated_fraction", attractors.truncated_fraction()},
          {"initial_distance", damage.initial_distance()},
          {"mean_final_distance", damage.mean_final_distance()},
          {"growth_factor", damage.growth_factor()}};
}

nlohmann::json metadata(const AgentReport& report) {
  const auto& c = report.config;
  auto seeds = nlohmann::json::array();
  for (const auto& r : report.runs) seeds.push_back(r.seed);
  nlohmann::json reset = nlohmann::json::object();
  if (const auto* f = std::get_if<FractionThreshold>(&c.reset)) reset = {{"type", "fraction"}, {"q_reset", f->q_reset}};
  else if (const auto* d = std::get_if<Deadline>(&c.reset)) reset = {{"type", "deadline"}, {"ticks", d->ticks}};
  else reset = {{"type", "manual"}};
  auto mix = nlohmann::json::array();
  for (const auto& share : c.mix) mix.push_back({{"policy", to_string(share.policy)}, {"fraction", share.fraction}});
  return {{"experiment", "agents"},
          {"n", c.n},
          {"k", c.k},
          {"policy_mix", mix},
          {"reset", reset},
          {"ticks", c.ticks},
          {"runs", c.runs},
          {"seed", c.seed},
          {"run_seeds", seeds},
          {"forbid_mutual_pairs", c.forbid_mutual_pairs},
          {"update", kAgentOrder},
          {"success_rate", report.success_rate()}};
}

nlohmann::json metadata(const PhaseSweepConfig& config) {
  return {{"experiment", "phase"},
          {"k_min", config.k_min},
          {"k_max", config.k_max},
          {"biases", config.biases},
          {"n", config.n},
          {"runs", config.runs},
          {"seed", config.seed},
          {"cell_seeds", "derive(seed, cell index), cells in k-major order"},
          {"max_steps", config.max_steps},
          {"damage_steps", config.damage_steps},
          {"update", kSynchronous}};
}

}  // namespace gridt::dynamics

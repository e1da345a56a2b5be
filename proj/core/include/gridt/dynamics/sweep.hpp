#pragma once

#include <cstdint>
#include <vector>

#include <nlohmann/json.hpp>

#include "gridt/csv.hpp"
#include "gridt/dynamics/agents.hpp"
#include "gridt/dynamics/attractor.hpp"
#include "gridt/dynamics/damage.hpp"

namespace gridt::dynamics {

struct PhaseSweepConfig {
  int k_min = 1;
  int k_max = 5;
  std::vector<double> biases{0.5};
  std::size_t n = 100;
  std::size_t runs = 20;
  std::uint64_t seed = 0;
  std::uint64_t max_steps = 10000;
  std::uint64_t damage_steps = 50;
};

struct PhaseCell {
  int k = 0;
  double bias = 0.0;
  double median_cycle = 0.0;  // +inf when the median run was truncated
  double truncated_fraction = 0.0;
  double growth_factor = 0.0;
  double final_distance = 0.0;
};

/// Cell (k, bias) uses seed derive(seed, cell index) for both surveys.
std::vector<PhaseCell> phase_sweep(const PhaseSweepConfig& config, unsigned threads = 0);

// CSV layouts, one header line each:
//   attractors: run,transient,cycle,truncated,steps
//   damage:     run,t,distance          (per run and step)
//   phase:      k,bias,median_cycle,truncated_fraction,growth_factor,final_distance
//   agent runs: run,seed,coordinated,first_threshold_reset,resets,final_q
//   agent ticks: run,tick,q,reset
//   kauffman:   run,transient,cycle,truncated,steps,final_distance,growth_factor
CsvTable to_csv(const AttractorReport& report);
/// Per-run join of the two surveys; run r used the same network in both.
CsvTable kauffman_csv(const AttractorReport& attractors, const DamageReport& damage);
CsvTable to_csv(const DamageReport& report);
CsvTable to_csv(const std::vector<PhaseCell>& cells);
CsvTable runs_csv(const AgentReport& report);
CsvTable ticks_csv(const AgentReport& report);

/// Metadata sidecars: parameters, seeds, update discipline and a summary.
nlohmann::json metadata(const AttractorReport& attractors, const DamageReport& damage);
nlohmann::json metadata(const AgentReport& report);
nlohmann::json metadata(const PhaseSweepConfig& config);

}  // namespace gridt::dynamics

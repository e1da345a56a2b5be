#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "gridt/dynamics/boolean_network.hpp"

namespace gridt::dynamics {

inline constexpr std::uint64_t kDefaultMaxSteps = 100000;

struct AttractorResult {
  std::uint64_t transient = 0;  // steps before the first state on the cycle
  std::uint64_t cycle = 0;      // 0 when truncated
  bool truncated = false;
  std::uint64_t steps = 0;      // updates performed
};

/// Iterates from `initial` until a state repeats or `max_steps` updates
/// have been made without a repeat (truncated).
AttractorResult find_attractor(const BooleanNetwork& net, const BitState& initial,
                               std::uint64_t max_steps = kDefaultMaxSteps);

struct AttractorReport {
  std::size_t n = 0;
  int k = 0;
  double bias = 0.5;
  std::uint64_t max_steps = kDefaultMaxSteps;
  std::uint64_t seed = 0;
  std::vector<AttractorResult> runs;

  /// Median cycle length with truncated runs ranked above every bound;
  /// +infinity when the median falls on truncated runs.
  double median_cycle() const;
  double truncated_fraction() const;
  double mean_transient() const;  // over non-truncated runs
  std::map<std::uint64_t, std::uint64_t> cycle_distribution() const;  // truncated excluded
};

/// One fresh network and one random initial state per run, both derived
/// from (seed, run).
AttractorReport attractor_survey(std::size_t n, int k, double p, std::size_t runs, std::uint64_t seed,
                                 std::uint64_t max_steps = kDefaultMaxSteps, unsigned threads = 0);

}  // namespace gridt::dynamics

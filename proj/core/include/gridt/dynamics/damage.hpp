#pragma once

#include <cstdint>
#include <vector>

#include "gridt/dynamics/boolean_network.hpp"

namespace gridt::dynamics {

struct DamageReport {
  std::size_t n = 0;
  int k = 0;
  double bias = 0.5;
  std::uint64_t steps = 0;
  std::uint64_t seed = 0;
  /// distance[run][t], normalized Hamming distance after t updates; t = 0
  /// is the single flipped bit, 1 / N.
  std::vector<std::vector<double>> distance;

  std::size_t runs() const noexcept { return distance.size(); }
  double initial_distance() const;
  std::vector<double> mean_series() const;
  double mean_final_distance() const;
  /// Mean of d(1) / d(0) over runs: the one-step amplification of a flip.
  double growth_factor() const;
};

/// Quenched: one network, a fresh random state and flipped node per run.
DamageReport damage_spread(const BooleanNetwork& net, std::uint64_t steps, std::size_t runs,
                           std::uint64_t seed, unsigned threads = 0);

/// A fresh network per run as well, derived from (seed, run).
DamageReport damage_survey(std::size_t n, int k, double p, std::uint64_t steps, std::size_t runs,
                           std::uint64_t seed, unsigned threads = 0);

}  // namespace gridt::dynamics

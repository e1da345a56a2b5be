#pragma once

#include <cstdint>
#include <map>

namespace gridt::analytics {

/// Outdegree counts pooled over sampled uniform K-in random graphs.
struct OutdegreeHistogram {
  std::uint64_t n = 0;
  int k = 0;
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;
  std::map<std::uint64_t, std::uint64_t> counts;  // k_out -> nodes
  // Per-graph moments of the zero-outdegree count, for standard errors.
  double zero_sum = 0.0;
  double zero_sq_sum = 0.0;

  std::uint64_t total_nodes() const;
  std::uint64_t total_edges() const;  // sum of k_out * count
  double mean_outdegree() const;
  double zero_fraction() const;
  /// Standard error of zero_fraction() treating graphs as i.i.d. units.
  double zero_fraction_standard_error() const;
};

/// Samples `samples` graphs on `n` nodes where every node draws `k` distinct
/// inputs uniformly from the other n - 1, and accumulates outdegrees.
OutdegreeHistogram outdegree_histogram(std::uint64_t n, int k, std::uint64_t samples,
                                       std::uint64_t seed);

}  // namespace gridt::analytics

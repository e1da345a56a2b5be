#include "gridt/analytics/outdegree.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "gridt/rng.hpp"

namespace gridt::analytics {

std::uint64_t OutdegreeHistogram::total_nodes() const {
  std::uint64_t total = 0;
  for (const auto& [deg, count] : counts) total += count;
  return total;
}

std::uint64_t OutdegreeHistogram::total_edges() const {
  std::uint64_t total = 0;
  for (const auto& [deg, count] : counts) total += deg * count;
  return total;
}

double OutdegreeHistogram::mean_outdegree() const {
  const auto nodes = total_nodes();
  return nodes == 0 ? 0.0 : static_cast<double>(total_edges()) / static_cast<double>(nodes);
}

double OutdegreeHistogram::zero_fraction() const {
  const auto nodes = total_nodes();
  if (nodes == 0) return 0.0;
  auto it = counts.find(0);
  return it == counts.end() ? 0.0 : static_cast<double>(it->second) / static_cast<double>(nodes);
}

double OutdegreeHistogram::zero_fraction_standard_error() const {
  if (samples < 2) return 0.0;
  const double s = static_cast<double>(samples);
  const double mean = zero_sum / s;
  const double var = std::max(0.0, (zero_sq_sum - s * mean * mean) / (s - 1.0));
  return std::sqrt(var / s) / static_cast<double>(n);
}

OutdegreeHistogram outdegree_histogram(std::uint64_t n, int k, std::uint64_t samples,
                                       std::uint64_t seed) {
  if (k < 1) throw std::invalid_argument("outdegree_histogram: K must be >= 1");
  if (n < static_cast<std::uint64_t>(k) + 1) {
    throw std::invalid_argument("outdegree_histogram: N must be >= K + 1");
  }
  if (samples < 1) throw std::invalid_argument("outdegree_histogram: samples must be >= 1");

  OutdegreeHistogram hist;
  hist.n = n;
  hist.k = k;
  hist.samples = samples;
  hist.seed = seed;

  Rng rng(seed);
  std::vector<std::uint64_t> outdegree(n);
  std::vector<std::uint64_t> chosen;
  chosen.reserve(static_cast<std::size_t>(k));
  const std::uint64_t pool = n - 1;

  for (std::uint64_t sample = 0; sample < samples; ++sample) {
    std::fill(outdegree.begin(), outdegree.end(), 0);
    for (std::uint64_t node = 0; node < n; ++node) {
      // Floyd's sampling of k distinct indices from [0, n - 1), then skip self.
      chosen.clear();
      for (std::uint64_t j = pool - static_cast<std::uint64_t>(k); j < pool; ++j) {
        const std::uint64_t t = rng.below(j + 1);
        const bool taken = std::find(chosen.begin(), chosen.end(), t) != chosen.end();
        chosen.push_back(taken ? j : t);
      }
      for (std::uint64_t idx : chosen) ++outdegree[idx >= node ? idx + 1 : idx];
    }
    std::uint64_t zeros = 0;
    for (std::uint64_t d : outdegree) {
      ++hist.counts[d];
      zeros += d == 0 ? 1 : 0;
    }
    hist.zero_sum += static_cast<double>(zeros);
    hist.zero_sq_sum += static_cast<double>(zeros) * static_cast<double>(zeros);
  }
  return hist;
}

}  // namespace gridt::analytics

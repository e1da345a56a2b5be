#include "gridt/dynamics/attractor.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

#include "gridt/dynamics/parallel.hpp"
#include "gridt/rng.hpp"

namespace gridt::dynamics {

AttractorResult find_attractor(const BooleanNetwork& net, const BitState& initial,
                               std::uint64_t max_steps) {
  if (max_steps < 1) throw std::invalid_argument("find_attractor: max_steps must be >= 1");
  if (initial.size() != net.n()) throw std::invalid_argument("find_attractor: state size mismatch");

  // Trajectory kept flat; the map goes from state hash to the first step
  // index with that hash (collisions fall back to a scan of the chain).
  const std::size_t words = initial.words().size();
  std::vector<std::uint64_t> trail;
  trail.reserve(words * std::min<std::uint64_t>(max_steps + 1, 1u << 16));
  std::unordered_multimap<std::uint64_t, std::uint64_t> seen;

  auto matches = [&](std::uint64_t index, const BitState& s) {
    return std::equal(s.words().begin(), s.words().end(), trail.begin() + index * words);
  };

  BitState cur = initial, next(net.n());
  for (std::uint64_t t = 0;; ++t) {
    const auto h = cur.hash();
    auto [lo, hi] = seen.equal_range(h);
    for (auto it = lo; it != hi; ++it) {
      if (matches(it->second, cur)) return {it->second, t - it->second, false, t};
    }
    if (t == max_steps) return {0, 0, true, t};
    seen.emplace(h, t);
    trail.insert(trail.end(), cur.words().begin(), cur.words().end());
    net.step(cur, next);
    std::swap(cur, next);
  }
}

double AttractorReport::median_cycle() const {
  if (runs.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::vector<double> v;
  v.reserve(runs.size());
  for (const auto& r : runs) {
    v.push_back(r.truncated ? std::numeric_limits<double>::infinity() : static_cast<double>(r.cycle));
  }
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  if (v.size() % 2) return v[m];
  return (v[m - 1] + v[m]) / 2.0;
}

double AttractorReport::truncated_fraction() const {
  if (runs.empty()) return 0.0;
  auto t = std::count_if(runs.begin(), runs.end(), [](const auto& r) { return r.truncated; });
  return static_cast<double>(t) / static_cast<double>(runs.size());
}

double AttractorReport::mean_transient() const {
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& r : runs) {
    if (r.truncated) continue;
    sum += static_cast<double>(r.transient);
    ++count;
  }
  return count ? sum / static_cast<double>(count) : std::numeric_limits<double>::quiet_NaN();
}

std::map<std::uint64_t, std::uint64_t> AttractorReport::cycle_distribution() const {
  std::map<std::uint64_t, std::uint64_t> d;
  for (const auto& r : runs) {
    if (!r.truncated) ++d[r.cycle];
  }
  return d;
}

AttractorReport attractor_survey(std::size_t n, int k, double p, std::size_t runs, std::uint64_t seed,
                                 std::uint64_t max_steps, unsigned threads) {
  if (runs < 1) throw std::invalid_argument("attractor_survey: runs must be >= 1");
  AttractorReport report;
  report.n = n;
  report.k = k;
  report.bias = p;
  report.max_steps = max_steps;
  report.seed = seed;
  report.runs.resize(runs);
  parallel_for(runs, threads, [&](std::size_t run) {
    const auto run_seed = Rng::derive(seed, run);
    const auto net = random_boolean_network(n, k, p, Rng::derive(run_seed, 0));
    report.runs[run] = find_attractor(net, random_state(n, Rng::derive(run_seed, 1)), max_steps);
  });
  return report;
}

}  // namespace gridt::dynamics

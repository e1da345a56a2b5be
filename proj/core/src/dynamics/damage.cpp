#include "gridt/dynamics/damage.hpp"

#include <stdexcept>

#include "gridt/dynamics/parallel.hpp"
#include "gridt/rng.hpp"

namespace gridt::dynamics {
namespace {

std::vector<double> one_run(const BooleanNetwork& net, std::uint64_t steps, std::uint64_t seed) {
  const std::size_t n = net.n();
  Rng rng(seed);
  BitState a = random_state(n, rng());
  BitState b = a;
  b.flip(rng.below(n));
  BitState na(n), nb(n);
  std::vector<double> d;
  d.reserve(steps + 1);
  d.push_back(1.0 / static_cast<double>(n));
  for (std::uint64_t t = 0; t < steps; ++t) {
    net.step(a, na);
    net.step(b, nb);
    std::swap(a, na);
    std::swap(b, nb);
    d.push_back(static_cast<double>(a.hamming(b)) / static_cast<double>(n));
  }
  return d;
}

void check(std::uint64_t steps, std::size_t runs) {
  if (steps < 1 || runs < 1) throw std::invalid_argument("damage_spread: steps and runs must be >= 1");
}

}  // namespace

double DamageReport::initial_distance() const { return n ? 1.0 / static_cast<double>(n) : 0.0; }

std::vector<double> DamageReport::mean_series() const {
  std::vector<double> mean(steps + 1, 0.0);
  for (const auto& run : distance) {
    for (std::size_t t = 0; t < run.size(); ++t) mean[t] += run[t];
  }
  for (auto& m : mean) m /= static_cast<double>(distance.size());
  return mean;
}

double DamageReport::mean_final_distance() const {
  double sum = 0.0;
  for (const auto& run : distance) sum += run.back();
  return sum / static_cast<double>(distance.size());
}

double DamageReport::growth_factor() const {
  double sum = 0.0;
  for (const auto& run : distance) sum += run[1] / run[0];
  return sum / static_cast<double>(distance.size());
}

DamageReport damage_spread(const BooleanNetwork& net, std::uint64_t steps, std::size_t runs,
                           std::uint64_t seed, unsigned threads) {
  check(steps, runs);
  DamageReport report{net.n(), net.k(), net.bias(), steps, seed, {}};
  report.distance.resize(runs);
  parallel_for(runs, threads, [&](std::size_t run) {
    report.distance[run] = one_run(net, steps, Rng::derive(seed, run));
  });
  return report;
}

DamageReport damage_survey(std::size_t n, int k, double p, std::uint64_t steps, std::size_t runs,
                           std::uint64_t seed, unsigned threads) {
  check(steps, runs);
  DamageReport report{n, k, p, steps, seed, {}};
  report.distance.resize(runs);
  parallel_for(runs, threads, [&](std::size_t run) {
    const auto run_seed = Rng::derive(seed, run);
    const auto net = random_boolean_network(n, k, p, Rng::derive(run_seed, 0));
    report.distance[run] = one_run(net, steps, Rng::derive(run_seed, 1));
  });
  return report;
}

}  // namespace gridt::dynamics

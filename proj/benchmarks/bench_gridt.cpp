#include <benchmark/benchmark.h>

#include "gridt/analytics/beta.hpp"
#include "gridt/analytics/influence.hpp"
#include "gridt/dynamics/attractor.hpp"
#include "gridt/dynamics/boolean_network.hpp"
#include "gridt/protocol/network.hpp"

namespace {

using namespace gridt;

void BM_KlBeta(benchmark::State& state) {
  const int k = static_cast<int>(state.range(0));
  const auto p = analytics::posterior_q(k, k / 2 + 1);
  const auto q = analytics::posterior_q(k, k / 2);
  for (auto _ : state) benchmark::DoNotOptimize(analytics::kl_beta(p, q));
}
BENCHMARK(BM_KlBeta)->Arg(4)->Arg(12)->Arg(64);

void BM_ExpectedInfluence(benchmark::State& state) {
  const int k = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(analytics::expected_influence(k));
}
BENCHMARK(BM_ExpectedInfluence)->Arg(4)->Arg(12)->Arg(64);

Network populated(std::size_t n, int k) {
  Network net = Network::create(k, GameSpec{"act", "reward", Manual{}}, NetworkConfig{"bench", 1});
  for (std::size_t i = 0; i < n; ++i) net.join(Profile{"u" + std::to_string(i), ""});
  return net;
}

void BM_Join(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    state.PauseTiming();
    Network net = populated(n, 4);
    state.ResumeTiming();
    benchmark::DoNotOptimize(net.join(Profile{"newcomer", ""}));
  }
}
BENCHMARK(BM_Join)->Arg(100)->Arg(1000)->Unit(benchmark::kMicrosecond);

void BM_Rewire(benchmark::State& state) {
  Network net = populated(static_cast<std::size_t>(state.range(0)), 4);
  const UserId user = net.state().members.begin()->first;
  net.activate_signal(user);
  for (auto _ : state) {
    const UserId drop = net.state().members.at(user).inputs.front();
    benchmark::DoNotOptimize(net.rewire(user, drop));
  }
}
BENCHMARK(BM_Rewire)->Arg(100)->Arg(1000)->Unit(benchmark::kMicrosecond);

void BM_BooleanStep(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const int k = static_cast<int>(state.range(1));
  const auto net = dynamics::random_boolean_network(n, k, 0.5, 42);
  auto s = dynamics::random_state(n, 43);
  dynamics::BitState next(n);
  for (auto _ : state) {
    net.step(s, next);
    std::swap(s, next);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_BooleanStep)->Args({200, 2})->Args({200, 4})->Args({10000, 4});

void BM_FindAttractor(benchmark::State& state) {
  const int k = static_cast<int>(state.range(0));
  const auto net = dynamics::random_boolean_network(200, k, 0.5, 7);
  const auto init = dynamics::random_state(200, 8);
  for (auto _ : state) benchmark::DoNotOptimize(dynamics::find_attractor(net, init, 10000));
}
BENCHMARK(BM_FindAttractor)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

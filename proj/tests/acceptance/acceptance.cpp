// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "gridt/analytics/beta.hpp"
#include "gridt/analytics/influence.hpp"
#include "gridt/analytics/outdegree.hpp"
#include "gridt/dynamics/attractor.hpp"
#include "gridt/dynamics/damage.hpp"
#include "gridt/rng.hpp"
#include "support/oracles.hpp"
#include "support/protocol_driver.hpp"
#include "support/server_scenarios.hpp"

namespace {

using namespace gridt;
using Clock = std::chrono::steady_clock;

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << "[failed: " << what << "] ";
    }
  }
};

struct Criterion {
  std::string name;
  double budget_seconds;  // 0: no runtime bound
  std::function<void(Verdict&)> body;
};

// P_empty(12, 4) against sampled random 4-in graphs, and the large-N limit.
void p_empty_exactness(Verdict& v) {
  const double exact = analytics::p_empty(12, 4);
  const auto hist = analytics::outdegree_histogram(12, 4, 200000, 20241014);
  const double est = hist.zero_fraction(), se = hist.zero_fraction_standard_error();
  const double z = std::abs(est - exact) / se;
  v.check(std::abs(exact - std::pow(7.0 / 11.0, 11)) < 1e-15, "closed form");
  v.check(z <= 3.0, "Monte Carlo within 3 SE");
  const double big = analytics::p_empty(1000000, 4);
  v.check(std::abs(big - std::exp(-4.0)) < 1e-4, "N=1e6 near e^-4");
  v.detail.precision(7);
  v.detail << "p_empty(12,4)=" << exact << " MC=" << est << " (se " << se << ", z " << z << ", "
           << hist.samples << " graphs); p_empty(1e6,4)=" << big << " e^-4=" << std::exp(-4.0);
}

void monotone_bound(Verdict& v) {
  std::size_t points = 0;
  for (int k = 1; k <= 8; ++k) {
    // log grid from N = K + 1 to 1e5, 40 points per decade, duplicates dropped
    std::vector<std::uint64_t> grid;
    for (double e = std::log10(k + 1.0); e < 5.0; e += 0.025) {
      grid.push_back(static_cast<std::uint64_t>(std::llround(std::pow(10.0, e))));
    }
    grid.push_back(100000);
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    double prev = -1.0;
    for (const auto n : grid) {
      const double p = analytics::p_empty(n, k);
      v.check(p > prev, "strictly increasing at K=" + std::to_string(k) + " N=" + std::to_string(n));
      v.check(p < std::exp(-static_cast<double>(k)), "below e^-K at K=" + std::to_string(k));
      prev = p;
      ++points;
    }
  }
  v.detail << points << " grid points over K=1..8, N from K+1 up to 1e5";
}

void kl_correctness(Verdict& v) {
  Rng rng(31337);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double a1 = 0.5 + 49.5 * rng.uniform(), b1 = 0.5 + 49.5 * rng.uniform();
    const double a2 = 0.5 + 49.5 * rng.uniform(), b2 = 0.5 + 49.5 * rng.uniform();
    worst = std::max(worst, std::abs(analytics::kl_beta({a1, b1}, {a2, b2}) -
                                         oracle::kl_beta_quadrature(a1, b1, a2, b2)));
  }
  const double point = analytics::kl_beta({2, 1}, {1, 2});
  v.check(worst < 1e-6, "1000 pairs within 1e-6");
  v.check(std::abs(point - 1.0) < 1e-9, "KL(Beta(2,1)||Beta(1,2)) = 1");
  v.detail << "max |closed form - quadrature| = " << worst << " over 1000 pairs; analytic point error "
           << std::abs(point - 1.0);
}

void influence_curve(Verdict& v) {
  for (int k = 1; k < 12; ++k) {
    v.check(analytics::expected_influence(k + 1) < analytics::expected_influence(k),
            "decreasing at K=" + std::to_string(k));
  }
  double four_term = 0.0;
  const double w[] = {1, 3, 3, 1};
  for (int omega = 0; omega < 4; ++omega) {
    four_term += w[omega] / 8.0 * oracle::kl_beta_quadrature(omega + 2, 4 - omega, omega + 1, 5 - omega);
  }
  const double e4 = analytics::expected_influence(4);
  v.check(std::abs(e4 - 0.46875) < 1e-9, "E[I](4) = 0.46875");
  v.check(std::abs(e4 - four_term) < 1e-9, "E[I](4) matches four-term quadrature sum");
  const auto table = analytics::k_sweep(1, 12, 0.05);
  v.check(table.optimal_k && *table.optimal_k == 3, "admissible max K = 3");
  v.check(table.optimal_k && *table.optimal_k >= 3 && *table.optimal_k <= 6, "inside [3,6]");
  v.detail.precision(12);
  v.detail << "E[I](4)=" << e4 << " four-term quadrature=" << four_term
           << " optimum K=" << (table.optimal_k ? std::to_string(*table.optimal_k) : "none");
}

void posterior_oracle(Verdict& v) {
  constexpr int cells = 20000;
  double worst = 0.0;
  for (int k = 1; k <= 12; ++k) {
    for (int omega = 0; omega <= k; ++omega) {
      const auto post = analytics::posterior_q(k, omega);
      const auto mass = oracle::grid_posterior(k, omega, cells);
      double cum = 0.0;
      for (int i = 0; i < cells; ++i) {
        cum += mass[i];
        worst = std::max(worst, std::abs(analytics::beta_cdf(post, (i + 1.0) / cells) - cum));
      }
    }
  }
  v.check(worst < 1e-3, "Kolmogorov distance < 1e-3");
  v.detail << "max Kolmogorov distance " << worst << " over K<=12, all omega (" << cells << "-cell grid)";
}

void protocol_suite(Verdict& v) {
  const auto report = testing::run_campaign(424242, 10000, 200);
  v.check(report.sequences >= 10000, ">= 1e4 sequences");
  v.check(report.total_violations() == 0, "zero violations");
  v.detail << report.sequences << " sequences, " << report.operations << " operations (" << report.rejected
           << " rejected), " << report.resets << " resets, largest network " << report.max_members << ", "
           << report.total_violations() << " violations";
  for (const auto& s : report.samples) v.detail << "; " << s;
}

void dynamics_signature(Verdict& v) {
  constexpr std::size_t n = 200, runs = 100, steps = 100;
  const std::uint64_t seed = 77;
  const auto d1 = dynamics::damage_survey(n, 1, 0.5, steps, runs, seed, 0);
  const auto d4 = dynamics::damage_survey(n, 4, 0.5, steps, runs, seed, 0);
  const auto a1 = dynamics::attractor_survey(n, 1, 0.5, runs, seed, dynamics::kDefaultMaxSteps, 0);
  const auto a4 = dynamics::attractor_survey(n, 4, 0.5, runs, seed, dynamics::kDefaultMaxSteps, 0);
  const double init = d1.initial_distance();
  v.check(d1.mean_final_distance() < init, "K=1 damage dies");
  v.check(d4.mean_final_distance() > 10.0 * d4.initial_distance(), "K=4 damage > 10x initial");
  v.check(a1.median_cycle() < a4.median_cycle(), "median cycle K=1 < K=4");
  v.detail << "initial " << init << "; final K=1 " << d1.mean_final_distance() << ", K=4 "
           << d4.mean_final_distance() << "; median cycle K=1 " << a1.median_cycle() << ", K=4 "
           << a4.median_cycle() << " (" << a4.truncated_fraction() * 100 << "% truncated at "
           << dynamics::kDefaultMaxSteps << ")";
}

void server_integration(Verdict& v) {
  {
    testing::TempDir dir;
    const auto r = testing::server_fuzz(dir.path(), 8, 150, 2026);
    v.check(r.requests >= 1000, ">= 1e3 requests");
    v.check(r.server_errors == 0 && r.unexpected.empty(), "no server errors");
    v.check(r.gapless && r.verify_violations.empty(), "log gapless and invariant-clean");
    v.check(r.replay_matches && r.sequential_matches, "log serializable");
    v.check(r.privacy_violations.empty() && r.bodies_checked > 0, "wire privacy");
    v.detail << "fuzz: 8 clients, " << r.requests << " requests, " << r.events << " events, "
             << r.bodies_checked << " member bodies schema-checked; ";
    if (!r.privacy_violations.empty()) v.detail << r.privacy_violations.front() << "; ";
  }
  {
    testing::TempDir dir;
    const auto r = testing::kill_and_replay(dir.path());
    v.check(r.state_matches && r.view_matches && r.signal_survived, "kill-and-replay");
    v.detail << "kill-and-replay: " << r.acknowledged_events << " events recovered "
             << (r.state_matches ? "identically" : "with differences");
  }
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria = {
      {"P_empty exactness", 60, p_empty_exactness},
      {"Monotone bound", 0, monotone_bound},
      {"KL correctness", 0, kl_correctness},
      {"Influence curve", 0, influence_curve},
      {"Posterior oracle", 0, posterior_oracle},
      {"Protocol property suite", 300, protocol_suite},
      {"Dynamics phase signature", 600, dynamics_signature},
      {"Server integration", 0, server_integration},
  };
  const std::string only = argc > 1 ? argv[1] : "";
  int failed = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && c.name.find(only) == std::string::npos) continue;
    Verdict v;
    const auto start = Clock::now();
    try {
      c.body(v);
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail << "[exception: " << e.what() << "]";
    }
    const double secs = std::chrono::duration<double>(Clock::now() - start).count();
    if (c.budget_seconds > 0) v.check(secs < c.budget_seconds, "runtime budget");
    std::printf("%s  %-26s %.1fs  %s\n", v.pass ? "PASS" : "FAIL", c.name.c_str(), secs, v.detail.str().c_str());
    std::fflush(stdout);
    failed += v.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "gridt/protocol/network.hpp"

namespace gridt::dynamics {

struct Committed {
  friend bool operator==(const Committed&, const Committed&) = default;
};
/// Activates when at least theta inputs are active.
struct Threshold {
  int theta = 1;
  friend bool operator==(const Threshold&, const Threshold&) = default;
};
/// Activates when the posterior mean of Q given the observed inputs reaches
/// the cutoff.
struct Bayesian {
  double cutoff = 0.5;
  friend bool operator==(const Bayesian&, const Bayesian&) = default;
};

using AgentPolicy = std::variant<Committed, Threshold, Bayesian>;

std::string to_string(const AgentPolicy& policy);

/// Whether an inactive agent with this view switches its signal on.
bool decide(const AgentPolicy& policy, const ViewSnapshot& view);

struct PolicyShare {
  AgentPolicy policy;
  double fraction = 0.0;
  friend bool operator==(const PolicyShare&, const PolicyShare&) = default;
};

struct RunConfig {
  std::size_t n = 20;
  int k = 4;
  std::vector<PolicyShare> mix;
  ResetRule reset = FractionThreshold{0.8};
  std::uint64_t ticks = 200;
  std::size_t runs = 1;
  std::uint64_t seed = 0;
  bool forbid_mutual_pairs = true;
};

/// Throws std::invalid_argument on range errors, unknown thresholds or a
/// mix whose fractions do not sum to 1 within 1e-9.
void validate(const RunConfig& config);

/// Agents per mix entry: floor(fraction * n) plus largest remainders.
std::vector<std::size_t> allocate(const std::vector<PolicyShare>& mix, std::size_t n);

/// "committed:0.25,threshold1:0.75". Names: committed, threshold<int>,
/// thresholdK (theta = k), bayesian (cutoff 0.5) or bayesian<cutoff>.
std::vector<PolicyShare> parse_policy_mix(std::string_view text, int k);
std::string format_policy_mix(const std::vector<PolicyShare>& mix);

/// "frac:0.8", "deadline:50" or "manual".
ResetRule parse_reset_rule(std::string_view text);
std::string format_reset_rule(const ResetRule& rule);

struct TickRecord {
  std::uint64_t tick = 0;
  double q = 0.0;  // fraction active after agents moved, before any reset
  std::optional<ResetReason> reset;
  friend bool operator==(const TickRecord&, const TickRecord&) = default;
};

struct AgentRun {
  std::size_t run = 0;
  std::uint64_t seed = 0;
  std::vector<TickRecord> trace;
  std::size_t resets = 0;
  std::optional<std::uint64_t> first_threshold_reset;
  /// Policy index (into the mix) of each member, in UserId order.
  std::vector<std::pair<UserId, std::size_t>> roles;
  /// Network right after all agents joined, when requested.
  std::optional<NetworkState> initial;

  bool coordinated() const noexcept { return first_threshold_reset.has_value(); }
};

/// One run. Agents join one at a time with random links, then each tick
/// they move in a freshly drawn random order, each reading only its own
/// view; afterwards the reset rule is checked and the clock advances.
AgentRun run_agent_once(const RunConfig& config, std::size_t run, bool keep_initial = false);

struct AgentReport {
  RunConfig config;
  std::vector<AgentRun> runs;

  double success_rate() const;
};

AgentReport run_agents(const RunConfig& config, unsigned threads = 0);

}  // namespace gridt::dynamics

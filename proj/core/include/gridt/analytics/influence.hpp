#pragma once

#include <cstdint>
#include <optional>
#include <vector>

namespace gridt::analytics {

/// How the other inputs' active count is distributed when averaging the
/// influence of one signal.
enum class OtherInputs {
  /// Binomial(K - 1, 1/2): the sender's own signal is excluded (default).
  ExcludeSender,
  /// Binomial(K, 1/2) over omega in [0, K - 1], renormalized.
  IncludeSender,
};

/// KL divergence (nats) between the observer's posterior with and without
/// the sender's active signal, given `omega_others` other active inputs.
double signal_influence(int k, int omega_others);

/// Binomial(n, 1/2) probability mass, computed by exact-ratio recurrence.
std::vector<double> binomial_half_weights(int n);

double expected_influence(int k, OtherInputs mode = OtherInputs::ExcludeSender);

/// Probability that a member's outgoing set is empty when every member
/// samples K inputs uniformly: (1 - K/(N-1))^(N-1). Requires N >= K + 1.
double p_empty(std::uint64_t n, int k);

/// Large-N limit of p_empty: e^-K.
double p_empty_limit(int k);

struct InfluenceRow {
  int k = 0;
  double expected_influence = 0.0;  // nats
  double p_empty_limit = 0.0;
  bool admissible = false;          // p_empty_limit < cap
};

struct InfluenceTable {
  std::vector<InfluenceRow> rows;
  double p_empty_cap = 0.05;
  std::optional<int> optimal_k;  // admissible K with the largest influence
};

inline constexpr double kDefaultPEmptyCap = 0.05;

InfluenceTable k_sweep(int k_min, int k_max, double p_empty_cap = kDefaultPEmptyCap,
                       OtherInputs mode = OtherInputs::ExcludeSender);

}  // namespace gridt::analytics

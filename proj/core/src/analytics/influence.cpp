#include "gridt/analytics/influence.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "gridt/analytics/beta.hpp"

namespace gridt::analytics {

double signal_influence(int k, int omega_others) {
  if (k < 1) throw std::invalid_argument("signal_influence: K must be >= 1");
  if (omega_others < 0 || omega_others > k - 1) {
    throw std::invalid_argument("signal_influence: omega_others must be in [0, K-1]");
  }
  return kl_beta(posterior_q(k, omega_others + 1), posterior_q(k, omega_others));
}

std::vector<double> binomial_half_weights(int n) {
  if (n < 0) throw std::invalid_argument("binomial_half_weights: n must be >= 0");
  std::vector<double> w(static_cast<std::size_t>(n) + 1);
  w[0] = std::ldexp(1.0, -n);
  for (int i = 0; i < n; ++i) {
    w[i + 1] = w[i] * static_cast<double>(n - i) / static_cast<double>(i + 1);
  }
  return w;
}

double expected_influence(int k, OtherInputs mode) {
  if (k < 1) throw std::invalid_argument("expected_influence: K must be >= 1");
  const auto weights = binomial_half_weights(mode == OtherInputs::ExcludeSender ? k - 1 : k);
  double total = 0.0;
  double mass = 0.0;
  for (int omega = 0; omega <= k - 1; ++omega) {
    total += weights[omega] * signal_influence(k, omega);
    mass += weights[omega];
  }
  return total / mass;
}

double p_empty(std::uint64_t n, int k) {
  if (k < 1) throw std::invalid_argument("p_empty: K must be >= 1");
  if (n < static_cast<std::uint64_t>(k) + 1) {
    throw std::invalid_argument("p_empty: N must be >= K + 1");
  }
  const double others = static_cast<double>(n - 1);
  if (n - 1 == static_cast<std::uint64_t>(k)) return 0.0;
  return std::exp(others * std::log1p(-static_cast<double>(k) / others));
}

double p_empty_limit(int k) { return std::exp(-static_cast<double>(k)); }

InfluenceTable k_sweep(int k_min, int k_max, double p_empty_cap, OtherInputs mode) {
  if (k_min < 1 || k_max < k_min) {
    throw std::invalid_argument("k_sweep: need 1 <= k_min <= k_max");
  }
  InfluenceTable table;
  table.p_empty_cap = p_empty_cap;
  for (int k = k_min; k <= k_max; ++k) {
    InfluenceRow row{k, expected_influence(k, mode), p_empty_limit(k), false};
    row.admissible = row.p_empty_limit < p_empty_cap;
    if (row.admissible &&
        (!table.optimal_k ||
         row.expected_influence > table.rows[*table.optimal_k - k_min].expected_influence)) {
      table.optimal_k = k;
    }
    table.rows.push_back(row);
  }
  return table;
}

}  // namespace gridt::analytics

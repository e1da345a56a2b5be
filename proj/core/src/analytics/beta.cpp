#include "gridt/analytics/beta.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "gridt/analytics/special_functions.hpp"

namespace gridt::analytics {
namespace {

void require_valid(const BetaParams& p) {
  if (!(p.alpha > 0.0) || !(p.beta > 0.0) || !std::isfinite(p.alpha) || !std::isfinite(p.beta)) {
    throw std::invalid_argument("Beta parameters must be finite and > 0");
  }
}

}  // namespace

BetaParams posterior_q(int k, int omega) {
  if (k < 1) throw std::invalid_argument("posterior_q: K must be >= 1");
  if (omega < 0 || omega > k) {
    throw std::invalid_argument("posterior_q: omega must be in [0, K], got " + std::to_string(omega));
  }
  return {static_cast<double>(omega) + 1.0, static_cast<double>(k - omega) + 1.0};
}

double beta_log_pdf(const BetaParams& p, double x) {
  require_valid(p);
  if (x < 0.0 || x > 1.0) return -std::numeric_limits<double>::infinity();
  const double lx = (p.alpha == 1.0) ? 0.0 : (p.alpha - 1.0) * std::log(x);
  const double l1x = (p.beta == 1.0) ? 0.0 : (p.beta - 1.0) * std::log1p(-x);
  return lx + l1x - log_beta(p.alpha, p.beta);
}

double beta_pdf(const BetaParams& p, double x) { return std::exp(beta_log_pdf(p, x)); }

double beta_cdf(const BetaParams& p, double x) {
  require_valid(p);
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  return incomplete_beta(p.alpha, p.beta, x);
}

double kl_beta(const BetaParams& p, const BetaParams& q) {
  require_valid(p);
  require_valid(q);
  if (p == q) return 0.0;
  const double value = log_beta(q.alpha, q.beta) - log_beta(p.alpha, p.beta) +
                       (p.alpha - q.alpha) * digamma(p.alpha) +
                       (p.beta - q.beta) * digamma(p.beta) +
                       (q.alpha - p.alpha + q.beta - p.beta) * digamma(p.alpha + p.beta);
  // Rounding can push near-identical pairs a hair below zero.
  return (value < 0.0 && value > -1e-12) ? 0.0 : value;
}

}  // namespace gridt::analytics

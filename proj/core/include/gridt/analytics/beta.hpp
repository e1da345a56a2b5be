#pragma once

namespace gridt::analytics {

struct BetaParams {
  double alpha = 1.0;
  double beta = 1.0;

  double mean() const noexcept { return alpha / (alpha + beta); }
  friend bool operator==(const BetaParams&, const BetaParams&) = default;
};

/// Posterior over the cooperator fraction after seeing `omega` active
/// signals among `k` inputs, starting from a uniform prior:
/// Beta(omega + 1, k - omega + 1).
BetaParams posterior_q(int k, int omega);

double beta_log_pdf(const BetaParams& p, double x);
double beta_pdf(const BetaParams& p, double x);
double beta_cdf(const BetaParams& p, double x);

/// KL(p || q) in nats, closed form in log-Beta and digamma terms.
double kl_beta(const BetaParams& p, const BetaParams& q);

}  // namespace gridt::analytics

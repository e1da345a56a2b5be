#pragma once

namespace gridt::analytics {

// Real-argument special functions for x > 0. Both use upward recurrence to
// x >= 10 followed by the asymptotic series; absolute error is below 1e-13
// for x >= 1e-3. Pure and thread safe (unlike std::lgamma, which may write
// the global signgam).

double log_gamma(double x);
double digamma(double x);
double log_beta(double a, double b);

/// Regularized incomplete beta I_x(a, b) by continued fraction.
double incomplete_beta(double a, double b, double x);

}  // namespace gridt::analytics

#pragma once

namespace ognn::special {

/// ln Gamma(x) for x > 0 (Lanczos, g = 607/128). Throws std::domain_error otherwise.
double log_gamma(double x);

/// psi(x) = d/dx ln Gamma(x) for x > 0: upward recurrence to x >= 10, then the
/// asymptotic Bernoulli series.
double digamma(double x);

/// ln B(x, y) for x, y > 0.
double log_beta(double x, double y);

}  // namespace ognn::special

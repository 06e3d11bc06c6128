#pragma once

#include <cmath>

#include "abba/numkit/orthant.hpp"

namespace abba::numkit {

// Unnormalized log densities; additive constants are dropped throughout.

/// LKJ(eta) for a 2x2 correlation matrix: (eta - 1) * log(1 - rho^2).
double lkj_log_density(Correlation2 rho, double eta);

/// Inverse-gamma(shape, scale): -(shape + 1) log x - scale / x. Throws std::domain_error for x <= 0.
double inv_gamma_log_density(double x, double shape, double scale);

/// log(1 + exp(x)) without overflow.
inline double softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

/// 1 / (1 + exp(-x)) without overflow.
inline double inv_logit(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline double logit(double p) { return std::log(p) - std::log1p(-p); }

}  // namespace abba::numkit

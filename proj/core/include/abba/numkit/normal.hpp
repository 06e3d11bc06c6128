#pragma once

#include <cmath>

namespace abba::numkit {

inline constexpr double kInvSqrt2Pi = 0.398942280401432677939946059934;
inline constexpr double kLogSqrt2Pi = 0.918938533204672741780329736406;

inline double std_normal_pdf(double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }

inline double std_normal_log_pdf(double z) { return -0.5 * z * z - kLogSqrt2Pi; }

/// Standard normal CDF via erfc; relative accuracy near machine precision in both tails.
inline double std_normal_cdf(double z) { return 0.5 * std::erfc(-z * 0.707106781186547524400844362105); }

/// Quantile of the standard normal. Throws std::domain_error unless 0 < p < 1.
double std_normal_inv_cdf(double p);

/// log Phi(z), finite for every finite z (asymptotic series in the far lower tail).
double log_std_normal_cdf(double z);

/// phi(z) / Phi(z), the derivative of log Phi(z). Stable for very negative z.
double inverse_mills_ratio(double z);

struct LogCdfMills {
  double log_cdf;
  double mills;  ///< phi(z) / Phi(z)
};

/// log Phi(z) and the inverse Mills ratio from a single tail evaluation.
LogCdfMills log_cdf_and_mills(double z);

}  // namespace abba::numkit

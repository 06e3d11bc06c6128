#include "abba/numkit/normal.hpp"

#include <boost/math/special_functions/erf.hpp>
#include <stdexcept>
#include <string>

namespace abba::numkit {
namespace {

// Below this point erfc loses the tail; switch to the asymptotic series of the Mills ratio.
constexpr double kTailSwitch = -37.0;

// Phi(z) ~ phi(z) / (-z) * series(z) as z -> -inf.
double lower_tail_series(double z) {
  const double r = 1.0 / (z * z);
  return 1.0 + r * (-1.0 + r * (3.0 + r * (-15.0 + r * (105.0 + r * -945.0))));
}

}  // namespace

double std_normal_inv_cdf(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::domain_error("std_normal_inv_cdf: p must lie in (0, 1), got " + std::to_string(p));
  }
  if (p > 0.5) return std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * (1.0 - p));
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

double log_std_normal_cdf(double z) {
  if (z > 5.0) return std::log1p(-std_normal_cdf(-z));
  if (z > kTailSwitch) return std::log(std_normal_cdf(z));
  return std_normal_log_pdf(z) - std::log(-z) + std::log(lower_tail_series(z));
}

double inverse_mills_ratio(double z) {
  if (z > kTailSwitch) return std_normal_pdf(z) / std_normal_cdf(z);
  return -z / lower_tail_series(z);
}

LogCdfMills log_cdf_and_mills(double z) {
  if (z > 5.0) {
    const double upper = std_normal_cdf(-z);
    return {std::log1p(-upper), std_normal_pdf(z) / (1.0 - upper)};
  }
  if (z > kTailSwitch) {
    const double cdf = std_normal_cdf(z);
    return {std::log(cdf), std_normal_pdf(z) / cdf};
  }
  const double series = lower_tail_series(z);
  return {std_normal_log_pdf(z) - std::log(-z) + std::log(series), -z / series};
}

}  // namespace abba::numkit

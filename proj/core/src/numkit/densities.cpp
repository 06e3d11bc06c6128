#include "abba/numkit/densities.hpp"

#include <stdexcept>
#include <string>

namespace abba::numkit {

double lkj_log_density(Correlation2 rho, double eta) {
  const double r = rho.value();
  return (eta - 1.0) * std::log1p(-r * r);
}

double inv_gamma_log_density(double x, double shape, double scale) {
  if (!(x > 0.0)) {
    throw std::domain_error("inv_gamma_log_density: x must be positive, got " + std::to_string(x));
  }
  return -(shape + 1.0) * std::log(x) - scale / x;
}

}  // namespace abba::numkit

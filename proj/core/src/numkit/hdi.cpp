#include "abba/numkit/hdi.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace abba::numkit {
namespace {

std::vector<double> sorted_checked(std::span<const double> samples, double mass) {
  if (samples.empty()) throw std::invalid_argument("interval: empty sample");
  if (!(mass > 0.0 && mass < 1.0)) throw std::invalid_argument("interval: mass must lie in (0, 1)");
  std::vector<double> sorted(samples.begin(), samples.end());
  if (!std::all_of(sorted.begin(), sorted.end(), [](double x) { return std::isfinite(x); })) {
    throw std::invalid_argument("interval: non-finite sample");
  }
  std::sort(sorted.begin(), sorted.end());
  return sorted;
}

std::size_t covered_count(std::size_t n, double mass) {
  // The epsilon keeps 0.95 * 2000 from rounding up to 1901.
  const auto covered = static_cast<std::size_t>(std::ceil(mass * static_cast<double>(n) - 1e-9));
  return std::clamp<std::size_t>(covered, 1, n);
}

}  // namespace

HdInterval hdi(std::span<const double> samples, double mass) {
  const std::vector<double> sorted = sorted_checked(samples, mass);
  const std::size_t n = sorted.size();
  const std::size_t covered = covered_count(n, mass);

  std::size_t best = 0;
  double best_width = sorted[covered - 1] - sorted[0];
  for (std::size_t i = 1; i + covered <= n; ++i) {
    const double width = sorted[i + covered - 1] - sorted[i];
    if (width < best_width) {
      best_width = width;
      best = i;
    }
  }
  return {sorted[best], sorted[best + covered - 1], mass};
}

HdInterval equal_tailed_interval(std::span<const double> samples, double mass) {
  const std::vector<double> sorted = sorted_checked(samples, mass);
  // Central window holding the same number of draws as the HDI, so the two are comparable.
  const std::size_t covered = covered_count(sorted.size(), mass);
  const std::size_t lo = (sorted.size() - covered) / 2;
  return {sorted[lo], sorted[lo + covered - 1], mass};
}

}  // namespace abba::numkit

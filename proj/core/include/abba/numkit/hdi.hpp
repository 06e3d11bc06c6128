#pragma once

#include <span>

namespace abba::numkit {

struct HdInterval {
  double low = 0.0;
  double high = 0.0;
  double mass = 0.0;

  double width() const noexcept { return high - low; }
  bool contains(double x) const noexcept { return low <= x && x <= high; }
};

/// Shortest window covering ceil(mass * n) sorted samples; ties go to the leftmost window.
/// Throws std::invalid_argument on empty input, non-finite samples, or mass outside (0, 1).
HdInterval hdi(std::span<const double> samples, double mass);

/// Central interval from type-7 (linear interpolation) sample quantiles.
HdInterval equal_tailed_interval(std::span<const double> samples, double mass);

}  // namespace abba::numkit

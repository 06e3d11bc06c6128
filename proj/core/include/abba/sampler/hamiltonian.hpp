#pragma once

#include <functional>
#include <span>
#include <vector>

namespace abba::sampler {

/// A differentiable log density on R^d. The callback writes the gradient and returns the value;
/// it returns -inf (or NaN) outside the support.
struct Target {
  std::size_t dimension = 0;
  std::function<double(std::span<const double>, std::span<double>)> log_density_gradient;
};

/// Position, momentum and cached potential gradient of one point in phase space.
struct PhasePoint {
  std::vector<double> q;
  std::vector<double> p;
  std::vector<double> grad;  ///< gradient of the log density at q
  double log_density = 0.0;

  explicit PhasePoint(std::size_t dim = 0) : q(dim), p(dim), grad(dim) {}
};

/// Euclidean Hamiltonian with diagonal inverse metric.
class DiagHamiltonian {
 public:
  DiagHamiltonian(const Target& target, std::span<const double> inverse_metric)
      : target_(target), inv_metric_(inverse_metric) {}

  double kinetic(const PhasePoint& z) const;
  double energy(const PhasePoint& z) const { return kinetic(z) - z.log_density; }
  /// Refreshes log_density and grad at z.q.
  void update(PhasePoint& z) const;
  /// One leapfrog step of size eps (negative eps integrates backwards).
  void leapfrog(PhasePoint& z, double eps) const;
  /// Velocity M^-1 p.
  void velocity(const PhasePoint& z, std::span<double> out) const;

 private:
  const Target& target_;
  std::span<const double> inv_metric_;
};

}  // namespace abba::sampler

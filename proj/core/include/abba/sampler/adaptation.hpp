#pragma once

#include <cstddef>
#include <vector>

namespace abba::sampler {

/// Nesterov dual averaging of log step size towards a target acceptance statistic
/// (Hoffman & Gelman 2014, with gamma = 0.05, t0 = 10, kappa = 0.75).
class StepSizeAdaptation {
 public:
  explicit StepSizeAdaptation(double target_accept) : delta_(target_accept) {}

  void set_mu(double mu) { mu_ = mu; }
  void restart();
  /// Returns the step size for the next iteration.
  double learn(double accept_stat);
  /// Final step size: the dual-averaged iterate.
  double complete() const;

 private:
  double delta_;
  double mu_ = 0.0;
  double counter_ = 0.0;
  double s_bar_ = 0.0;
  double x_bar_ = 0.0;
};

/// Warm-up schedule: an initial fast buffer (15%), doubling slow windows starting at 25
/// iterations, and a terminal fast buffer (10%). The diagonal metric is re-estimated at the end
/// of every slow window.
class WindowedVarianceAdaptation {
 public:
  WindowedVarianceAdaptation(std::size_t dimension, int num_warmup);

  /// Feeds the current position. Returns true when a window closed and `inverse_metric` was
  /// updated (regularized towards 1e-3).
  bool learn(const std::vector<double>& q, std::vector<double>& inverse_metric);

  int init_buffer() const { return init_buffer_; }
  int term_buffer() const { return term_buffer_; }
  /// Iteration indices at which slow windows close, for inspection.
  std::vector<int> window_ends() const;

 private:
  bool in_window() const;
  bool window_end() const;
  void next_window();

  int num_warmup_;
  int init_buffer_ = 0;
  int term_buffer_ = 0;
  int base_window_ = 0;
  int counter_ = 0;
  int window_size_ = 0;
  int next_window_end_ = 0;
  bool enabled_ = true;
  // Welford accumulators.
  std::size_t n_ = 0;
  std::vector<double> mean_, m2_;
};

}  // namespace abba::sampler

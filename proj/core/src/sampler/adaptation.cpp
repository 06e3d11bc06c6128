#include "abba/sampler/adaptation.hpp"

#include <algorithm>
#include <cmath>

namespace abba::sampler {

void StepSizeAdaptation::restart() {
  counter_ = 0.0;
  s_bar_ = 0.0;
  x_bar_ = 0.0;
}

double StepSizeAdaptation::learn(double accept_stat) {
  constexpr double gamma = 0.05, t0 = 10.0, kappa = 0.75;
  counter_ += 1.0;
  accept_stat = std::min(1.0, accept_stat);
  const double eta = 1.0 / (counter_ + t0);
  s_bar_ = (1.0 - eta) * s_bar_ + eta * (delta_ - accept_stat);
  const double x = mu_ - s_bar_ * std::sqrt(counter_) / gamma;
  const double x_eta = std::pow(counter_, -kappa);
  x_bar_ = (1.0 - x_eta) * x_bar_ + x_eta * x;
  return std::exp(x);
}

double StepSizeAdaptation::complete() const { return std::exp(x_bar_); }

WindowedVarianceAdaptation::WindowedVarianceAdaptation(std::size_t dimension, int num_warmup)
    : num_warmup_(num_warmup), mean_(dimension, 0.0), m2_(dimension, 0.0) {
  init_buffer_ = static_cast<int>(0.15 * num_warmup);
  term_buffer_ = static_cast<int>(0.10 * num_warmup);
  base_window_ = std::min(25, num_warmup - init_buffer_ - term_buffer_);
  if (num_warmup < 20 || base_window_ < 1) {
    enabled_ = false;
    return;
  }
  window_size_ = base_window_;
  next_window_end_ = init_buffer_ + window_size_ - 1;
}

bool WindowedVarianceAdaptation::in_window() const {
  return counter_ >= init_buffer_ && counter_ < num_warmup_ - term_buffer_ &&
         counter_ != num_warmup_;
}

bool WindowedVarianceAdaptation::window_end() const {
  return counter_ == next_window_end_ && counter_ != num_warmup_;
}

void WindowedVarianceAdaptation::next_window() {
  const int last = num_warmup_ - term_buffer_ - 1;
  if (next_window_end_ == last) return;
  window_size_ *= 2;
  next_window_end_ = counter_ + window_size_;
  // Stretch the final slow window to the terminal buffer instead of leaving a short one.
  if (next_window_end_ != last && next_window_end_ + 2 * window_size_ >= num_warmup_ - term_buffer_) {
    next_window_end_ = last;
  }
}

bool WindowedVarianceAdaptation::learn(const std::vector<double>& q,
                                       std::vector<double>& inverse_metric) {
  if (!enabled_) return false;
  if (in_window()) {
    ++n_;
    for (std::size_t i = 0; i < q.size(); ++i) {
      const double delta = q[i] - mean_[i];
      mean_[i] += delta / static_cast<double>(n_);
      m2_[i] += delta * (q[i] - mean_[i]);
    }
  }
  if (window_end()) {
    next_window();
    const double n = static_cast<double>(n_);
    for (std::size_t i = 0; i < q.size(); ++i) {
      const double var = n > 1.0 ? m2_[i] / (n - 1.0) : 1.0;
      inverse_metric[i] = (n / (n + 5.0)) * var + 1e-3 * (5.0 / (n + 5.0));
    }
    n_ = 0;
    std::fill(mean_.begin(), mean_.end(), 0.0);
    std::fill(m2_.begin(), m2_.end(), 0.0);
    ++counter_;
    return true;
  }
  ++counter_;
  return false;
}

std::vector<int> WindowedVarianceAdaptation::window_ends() const {
  WindowedVarianceAdaptation copy = *this;
  std::vector<int> ends;
  std::vector<double> q(copy.mean_.size(), 0.0), metric(copy.mean_.size(), 1.0);
  for (int it = copy.counter_; it < num_warmup_; ++it) {
    if (copy.learn(q, metric)) ends.push_back(it);
  }
  return ends;
}

}  // namespace abba::sampler

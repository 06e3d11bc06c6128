#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

namespace abba::sampler {

struct SamplerConfig {
  int chains = 2;
  int warmup_iters = 5000;
  int sampling_iters = 10000;
  double target_accept = 0.8;
  int max_tree_depth = 10;
  std::uint64_t seed = 0;

  /// Throws ValidationError for non-positive counts or target_accept outside (0, 1).
  void validate() const;
};

/// Named schedules: "desk" (2 x 500 warm-up / 1000 draws), "paper" (2 x 5000 / 10000) and
/// "smoke" (2 x 150 / 200, for tests).
std::optional<SamplerConfig> preset(std::string_view name);

}  // namespace abba::sampler

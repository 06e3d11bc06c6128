#include "abba/sampler/config.hpp"

#include "abba/errors.hpp"

namespace abba::sampler {

void SamplerConfig::validate() const {
  if (chains < 1) throw ValidationError("sampler: chains must be at least 1");
  if (warmup_iters < 0) throw ValidationError("sampler: warmup_iters must be non-negative");
  if (sampling_iters < 1) throw ValidationError("sampler: sampling_iters must be at least 1");
  if (!(target_accept > 0.0 && target_accept < 1.0)) {
    throw ValidationError("sampler: target_accept must lie in (0, 1)");
  }
  if (max_tree_depth < 1 || max_tree_depth > 20) {
    throw ValidationError("sampler: max_tree_depth must lie in [1, 20]");
  }
}

std::optional<SamplerConfig> preset(std::string_view name) {
  SamplerConfig c;
  if (name == "paper") return c;
  if (name == "desk") {
    c.warmup_iters = 500;
    c.sampling_iters = 1000;
    return c;
  }
  if (name == "smoke") {
    c.warmup_iters = 150;
    c.sampling_iters = 200;
    return c;
  }
  return std::nullopt;
}

}  // namespace abba::sampler

#pragma once

#include <cstdint>
#include <vector>

#include "abba/models/model.hpp"
#include "abba/sampler/config.hpp"
#include "abba/sampler/nuts.hpp"

namespace abba::posterior {

struct FitOptions {
  sampler::SamplerConfig sampler{};
  std::uint64_t stream = 0;  ///< e.g. the replicate index; combined with the model kind
  bool parallel_chains = true;
  /// Stream tag of each stratified block. Defaults to the subtrial index; override when a
  /// subtrial is fitted on its own but should reuse the stream it gets inside a larger trial.
  std::vector<std::uint64_t> block_tags;
};

/// Posterior sample of one model on one dataset.
///
/// Hierarchical kinds are one sampler run. Stratified kinds factorize over subtrials and run as
/// independent single-subtrial problems, one block per subtrial.
class Fit {
 public:
  Fit(models::Model model, std::vector<models::Model> block_models,
      std::vector<sampler::PosteriorDraws> blocks, int max_tree_depth);

  const models::Model& model() const noexcept { return model_; }
  std::size_t block_count() const noexcept { return blocks_.size(); }
  const models::Model& block_model(std::size_t b) const { return block_models_[b]; }
  const sampler::PosteriorDraws& block(std::size_t b) const { return blocks_[b]; }
  /// Block holding subtrial k (always 0 for hierarchical kinds).
  std::size_t block_of(int k) const { return blocks_.size() == 1 ? 0 : static_cast<std::size_t>(k); }
  int max_tree_depth() const noexcept { return max_tree_depth_; }

  /// All blocks in the coordinates and names of the full model's layout.
  const sampler::PosteriorDraws& draws() const noexcept { return merged_; }

 private:
  models::Model model_;
  std::vector<models::Model> block_models_;
  std::vector<sampler::PosteriorDraws> blocks_;
  sampler::PosteriorDraws merged_;
  int max_tree_depth_;
};

/// Uniform(-2, 2) on every coordinate except the latent u, drawn from Uniform(0.05, 0.95).
sampler::InitStrategy init_strategy(const models::ParameterLayout& layout);

/// Throws InitializationError when a chain finds no finite starting point.
Fit fit(const models::Model& model, const FitOptions& options = {});

}  // namespace abba::posterior

#include "abba/posterior/fit.hpp"

#include <cmath>

#include "abba/numkit/densities.hpp"
#include "abba/numkit/random.hpp"

namespace abba::posterior {
namespace {

sampler::Target make_target(const models::Model& model) {
  sampler::Target t;
  t.dimension = model.dimension();
  t.log_density_gradient = [&model](std::span<const double> x, std::span<double> g) {
    return model.log_density_gradient(x, g);
  };
  return t;
}

sampler::PosteriorDraws merge(const models::Model& model,
                              const std::vector<sampler::PosteriorDraws>& blocks) {
  if (blocks.size() == 1) {
    sampler::PosteriorDraws out = blocks.front();
    out.names = model.layout()->names();
    return out;
  }
  const models::ParameterLayout& layout = *model.layout();
  sampler::PosteriorDraws out;
  out.names = layout.names();
  out.dimension = layout.dimension();
  out.iterations = blocks.front().iterations;
  out.chains.resize(blocks.front().chains.size());
  for (std::size_t c = 0; c < out.chains.size(); ++c) {
    sampler::ChainDraws& chain = out.chains[c];
    chain.draws.assign(out.iterations * out.dimension, 0.0);
    chain.log_density.assign(out.iterations, 0.0);
    chain.divergent.assign(out.iterations, 0);
    chain.tree_depth.assign(out.iterations, 0);
    chain.accept_stat.assign(out.iterations, 0.0);
    chain.inverse_metric.assign(out.dimension, 0.0);
    double log_step = 0.0;
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      const sampler::ChainDraws& src = blocks[b].chains[c];
      const std::size_t offset = layout.block_offset(static_cast<int>(b));
      const std::size_t width = blocks[b].dimension;
      for (std::size_t it = 0; it < out.iterations; ++it) {
        for (std::size_t j = 0; j < width; ++j) {
          chain.draws[it * out.dimension + offset + j] = src.draws[it * width + j];
        }
        // The joint density of independent blocks is the sum of the block densities.
        chain.log_density[it] += src.log_density[it];
        chain.divergent[it] = chain.divergent[it] | src.divergent[it];
        chain.tree_depth[it] = std::max(chain.tree_depth[it], src.tree_depth[it]);
        chain.accept_stat[it] += src.accept_stat[it] / static_cast<double>(blocks.size());
      }
      for (std::size_t j = 0; j < width; ++j) chain.inverse_metric[offset + j] = src.inverse_metric[j];
      log_step += std::log(src.step_size);
    }
    chain.step_size = std::exp(log_step / static_cast<double>(blocks.size()));
  }
  return out;
}

}  // namespace

Fit::Fit(models::Model model, std::vector<models::Model> block_models,
         std::vector<sampler::PosteriorDraws> blocks, int max_tree_depth)
    : model_(std::move(model)),
      block_models_(std::move(block_models)),
      blocks_(std::move(blocks)),
      max_tree_depth_(max_tree_depth) {
  merged_ = merge(model_, blocks_);
}

sampler::InitStrategy init_strategy(const models::ParameterLayout& layout) {
  sampler::InitStrategy s;
  if (!layout.has_latent()) return s;
  const double lo = numkit::logit(0.05), hi = numkit::logit(0.95);
  std::size_t begin = layout.dimension(), end = 0;
  for (std::size_t i = 0; i < layout.dimension(); ++i) {
    if (layout.transform(i) == models::Transform::InvLogit) {
      // Latent coordinates form one contiguous run per block.
      if (begin == layout.dimension()) begin = i;
      end = i + 1;
    } else if (begin != layout.dimension()) {
      s.ranges.push_back({begin, end, lo, hi});
      begin = layout.dimension();
    }
  }
  if (begin != layout.dimension()) s.ranges.push_back({begin, end, lo, hi});
  return s;
}

Fit fit(const models::Model& model, const FitOptions& options) {
  const models::ModelKind kind = model.spec().kind;
  const auto kind_tag = static_cast<std::uint64_t>(kind) + 1;
  std::vector<models::Model> block_models;
  std::vector<sampler::PosteriorDraws> blocks;

  sampler::RunOptions run;
  run.parallel_chains = options.parallel_chains;

  if (models::is_hierarchical(kind)) {
    block_models.push_back(model);
    run.stream = numkit::stream_id({options.stream, kind_tag});
    blocks.push_back(sampler::run(make_target(block_models.back()), options.sampler,
                                  init_strategy(*model.layout()), run));
  } else {
    const int K = model.spec().subtrials;
    block_models.reserve(static_cast<std::size_t>(K));
    for (int k = 0; k < K; ++k) {
      block_models.push_back(model.subtrial_model(k));
      const std::uint64_t tag = static_cast<std::size_t>(k) < options.block_tags.size()
                                    ? options.block_tags[static_cast<std::size_t>(k)]
                                    : static_cast<std::uint64_t>(k);
      run.stream = numkit::stream_id({options.stream, kind_tag, tag});
      const models::Model& m = block_models.back();
      blocks.push_back(sampler::run(make_target(m), options.sampler, init_strategy(*m.layout()), run));
    }
  }
  return Fit(model, std::move(block_models), std::move(blocks), options.sampler.max_tree_depth);
}

}  // namespace abba::posterior

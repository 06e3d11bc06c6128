#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "abba/numkit/random.hpp"
#include "abba/sampler/config.hpp"
#include "abba/sampler/hamiltonian.hpp"

namespace abba::sampler {

/// Box for initial values of a coordinate range [begin, end).
struct CoordinateRange {
  std::size_t begin = 0;
  std::size_t end = 0;
  double lo = -2.0;
  double hi = 2.0;
};

/// Initial values: Uniform(-radius, radius) on every unconstrained coordinate unless a range
/// overrides it.
struct InitStrategy {
  double radius = 2.0;
  std::vector<CoordinateRange> ranges;
  int max_attempts = 100;
};

std::vector<double> initialize(std::size_t dimension, const InitStrategy& strategy, numkit::Rng& rng);

struct ChainDraws {
  std::vector<double> draws;  ///< iterations x dimension, row-major, unconstrained
  std::vector<double> log_density;
  std::vector<unsigned char> divergent;
  std::vector<int> tree_depth;
  std::vector<double> accept_stat;
  double step_size = 0.0;
  std::vector<double> inverse_metric;
};

/// Retained draws of every chain. Names may be empty when the caller has none.
struct PosteriorDraws {
  std::vector<std::string> names;
  std::size_t dimension = 0;
  std::size_t iterations = 0;
  std::vector<ChainDraws> chains;

  double at(std::size_t chain, std::size_t iter, std::size_t param) const {
    return chains[chain].draws[iter * dimension + param];
  }
  /// Draws of one parameter in one chain.
  std::vector<double> column(std::size_t param, std::size_t chain) const;
  std::size_t divergences() const;
  std::size_t max_depth_hits(int max_depth) const;
};

struct RunOptions {
  std::uint64_t stream = 0;     ///< distinguishes independent fits sharing a master seed
  bool parallel_chains = true;  ///< one thread per chain
};

/// Adaptive NUTS (multinomial trajectory sampling, generalized no-U-turn criterion).
/// Deterministic given (target, config, strategy, options.stream).
/// Throws InitializationError when no finite starting point is found.
PosteriorDraws run(const Target& target, const SamplerConfig& config,
                   const InitStrategy& strategy = {}, const RunOptions& options = {});

}  // namespace abba::sampler

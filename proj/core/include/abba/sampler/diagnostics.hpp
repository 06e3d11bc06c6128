#pragma once

#include <span>
#include <vector>

#include "abba/sampler/nuts.hpp"

namespace abba::sampler {

struct Diagnostics {
  std::vector<double> rhat;      ///< per parameter, max of rank-normalized bulk and folded split-R-hat
  std::vector<double> ess_bulk;  ///< per parameter
  std::size_t divergences = 0;
  std::size_t max_depth_hits = 0;
};

/// Rank-normalized split-R-hat of a set of chains of equal length (Vehtari et al. 2021).
/// Constant draws shared by every chain give exactly 1.
double split_rhat(const std::vector<std::vector<double>>& chains);

/// Bulk effective sample size (rank-normalized split chains, Geyer initial monotone sequence),
/// capped at the total number of draws.
double ess_bulk(const std::vector<std::vector<double>>& chains);

Diagnostics diagnostics(const PosteriorDraws& draws, int max_tree_depth = 10);

}  // namespace abba::sampler

#pragma once

#include <string>
#include <vector>

#include "abba/posterior/lor.hpp"
#include "abba/sampler/diagnostics.hpp"
#include "abba/simlab/metrics.hpp"
#include "abba/simlab/replicates.hpp"

namespace abba::io {

/// subtrial,lor_mean,hdi_low,hdi_high,success,draws,lor_variance
/// `labels` replace subtrial indices when given.
std::string format_summary_csv(const std::vector<posterior::SubtrialSummary>& rows,
                               const std::vector<std::string>& labels = {});

/// parameter,rhat,ess_bulk
std::string format_diagnostics_csv(const std::vector<std::string>& names, const sampler::Diagnostics& d);

/// chain,step_size,divergences,max_depth_hits,mean_accept_stat
std::string format_sampler_csv(const sampler::PosteriorDraws& draws, int max_tree_depth);

/// replicate,subtrial,model,lor_mean,hdi_low,hdi_high,success,rhat_max,divergences
/// (subtrials are numbered from 1)
std::string format_replicates_csv(const std::vector<simlab::ReplicateRow>& rows);

/// One row per model and subtrial: every metric with its Monte Carlo SE. Power and
/// type_one_error are separate columns; the one that does not apply is left empty.
std::string format_aggregate_csv(const simlab::SimulationReport& report);

/// Pairwise comparisons (abba vs bin, abba vs abba-strat, bin vs bin-strat) of mean interval
/// width and power, as percentage changes of the first model relative to the second.
std::string format_comparison_csv(const simlab::SimulationReport& report);

/// Percentage change of `a` relative to `b`: 100 (a - b) / b.
double percent_change(double a, double b);

}  // namespace abba::io

#pragma once

#include <cstdint>
#include <vector>

#include "abba/models/data.hpp"
#include "abba/numkit/random.hpp"
#include "abba/simlab/scenario.hpp"

namespace abba::simlab {

/// Draws one trial: for every subtrial, n_per_arm control subjects then n_per_arm treated ones.
/// y_binary = 1 exactly when the latent variable is <= 0. Requires a calibrated scenario.
std::vector<models::SubjectRecord> generate_dataset(const ScenarioSpec& spec,
                                                    const BaselineModel& baseline, numkit::Rng& rng);

/// A generated trial with its reference quantities.
struct SimulatedTrial {
  std::vector<models::SubjectRecord> records;
  /// Per subtrial: responder probability at the true parameters averaged over each arm's
  /// baselines (control, treatment), and the log odds ratio of those rates.
  std::vector<Pair> true_rates;
  std::vector<double> true_lor;
  /// Per subtrial: observed responder proportions (control, treatment).
  std::vector<Pair> observed_rates;
};

/// Replicate `replicate` of the scenario under master seed `seed`; the data stream is disjoint
/// from every sampler stream.
SimulatedTrial simulate_trial(const ScenarioSpec& spec, const BaselineModel& baseline,
                              std::uint64_t seed, std::uint64_t replicate);

}  // namespace abba::simlab

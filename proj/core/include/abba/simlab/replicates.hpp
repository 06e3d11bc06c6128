#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "abba/models/spec.hpp"
#include "abba/sampler/config.hpp"
#include "abba/simlab/metrics.hpp"
#include "abba/simlab/scenario.hpp"

namespace abba::simlab {

struct ReplicateOptions {
  /// Models fitted to every replicate. `subtrials` and `rule` are taken from the scenario.
  std::vector<models::ModelSpec> models;
  std::size_t replicates = 1;
  std::uint64_t first_replicate = 0;
  sampler::SamplerConfig sampler{};  ///< sampler.seed is the master seed
  unsigned workers = 1;
  BaselineModel baseline{};
  double max_failure_fraction = 0.05;
  /// Called from worker threads after each finished replicate.
  std::function<void(std::size_t done, std::size_t total)> progress;
};

struct FailedFit {
  std::uint64_t replicate = 0;
  std::string model;
  std::string message;
};

struct SimulationReport {
  ScenarioSpec scenario;
  std::size_t requested = 0;
  std::vector<ReplicateRow> rows;   ///< by replicate, then model order, then subtrial
  std::vector<MetricsRow> metrics;  ///< by model order, then subtrial
  std::vector<FailedFit> failures;
};

/// Generates each replicate once, fits every model to the identical dataset and aggregates.
/// Output is independent of the worker count. Failed fits are recorded and excluded; more than
/// max_failure_fraction failed fits raise ReplicateFailure. Requires a calibrated scenario.
SimulationReport run_replicates(const ScenarioSpec& scenario, const ReplicateOptions& options);

/// Worker count from ABBA_WORKERS, else the hardware concurrency (at least 1).
unsigned default_workers();

}  // namespace abba::simlab

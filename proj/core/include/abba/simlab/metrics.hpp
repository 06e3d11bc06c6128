#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "abba/numkit/hdi.hpp"

namespace abba::simlab {

/// One subtrial of one model fitted to one replicate.
struct ReplicateRow {
  std::uint64_t replicate = 0;
  int subtrial = 0;
  std::string model;
  double lor_mean = 0.0;
  numkit::HdInterval hdi{};
  bool success = false;
  double lor_variance = 0.0;  ///< posterior variance of the log odds ratio draws
  double true_lor = 0.0;      ///< dataset-level log odds ratio at the true parameters
  double rhat_max = 1.0;
  std::size_t divergences = 0;
  std::size_t transitions = 0;  ///< sampling iterations behind `divergences`
  std::size_t clamps = 0;
  bool flagged = false;  ///< > 1% divergences or R-hat > 1.05
};

/// A metric and its Monte Carlo standard error (absent with fewer than two replicates).
struct Estimate {
  double value = 0.0;
  std::optional<double> mcse;
};

struct MetricsRow {
  int subtrial = 0;
  std::string model;
  std::size_t replicates = 0;
  bool null_effect = false;  ///< power is a type-I error rate
  double reference_lor = 0.0;
  Estimate bias;       ///< mean of (posterior mean - dataset-level true LOR)
  Estimate precision;  ///< mean of reciprocal posterior variances
  Estimate power;      ///< share of replicates whose lower limit exceeds 0
  Estimate width;      ///< mean interval width
  Estimate coverage;   ///< share of intervals containing `reference_lor`
  std::size_t flagged = 0;
  std::size_t clamps = 0;
};

/// Operating characteristics of one subtrial and model over its replicate rows.
/// Proportions carry binomial standard errors, means carry sample standard errors.
MetricsRow compute_metrics(std::span<const ReplicateRow> rows, double reference_lor, bool null_effect);

}  // namespace abba::simlab

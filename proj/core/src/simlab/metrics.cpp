#include "abba/simlab/metrics.hpp"

#include <cmath>

#include "abba/errors.hpp"

namespace abba::simlab {
namespace {

Estimate mean_estimate(const std::vector<double>& v) {
  const double n = static_cast<double>(v.size());
  double sum = 0.0;
  for (double x : v) sum += x;
  Estimate e{sum / n, std::nullopt};
  if (v.size() >= 2) {
    double ss = 0.0;
    for (double x : v) ss += (x - e.value) * (x - e.value);
    e.mcse = std::sqrt(ss / (n - 1.0) / n);
  }
  return e;
}

Estimate proportion_estimate(std::size_t hits, std::size_t n) {
  const double p = static_cast<double>(hits) / static_cast<double>(n);
  Estimate e{p, std::nullopt};
  if (n >= 2) e.mcse = std::sqrt(p * (1.0 - p) / static_cast<double>(n));
  return e;
}

}  // namespace

MetricsRow compute_metrics(std::span<const ReplicateRow> rows, double reference_lor, bool null_effect) {
  if (rows.empty()) throw ValidationError("compute_metrics: no replicate rows");
  MetricsRow m;
  m.subtrial = rows.front().subtrial;
  m.model = rows.front().model;
  m.replicates = rows.size();
  m.null_effect = null_effect;
  m.reference_lor = reference_lor;

  std::vector<double> bias, precision, width;
  std::size_t success = 0, covered = 0;
  for (const ReplicateRow& r : rows) {
    bias.push_back(r.lor_mean - r.true_lor);
    precision.push_back(1.0 / r.lor_variance);
    width.push_back(r.hdi.width());
    success += r.success ? 1 : 0;
    covered += r.hdi.contains(reference_lor) ? 1 : 0;
    m.flagged += r.flagged ? 1 : 0;
    m.clamps += r.clamps;
  }
  m.bias = mean_estimate(bias);
  m.precision = mean_estimate(precision);
  m.width = mean_estimate(width);
  m.power = proportion_estimate(success, rows.size());
  m.coverage = proportion_estimate(covered, rows.size());
  return m;
}

}  // namespace abba::simlab

#include "abba/simlab/replicates.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>

#include "abba/errors.hpp"
#include "abba/models/model.hpp"
#include "abba/posterior/fit.hpp"
#include "abba/posterior/lor.hpp"
#include "abba/simlab/generate.hpp"

namespace abba::simlab {
namespace {

struct ReplicateResult {
  std::vector<ReplicateRow> rows;
  std::vector<FailedFit> failures;
};

ReplicateResult run_one(const ScenarioSpec& scenario, const ReplicateOptions& options,
                        std::uint64_t replicate) {
  ReplicateResult out;
  const SimulatedTrial trial =
      simulate_trial(scenario, options.baseline, options.sampler.seed, replicate);
  const models::Dataset data(trial.records, scenario.K());

  for (models::ModelSpec spec : options.models) {
    spec.subtrials = scenario.K();
    spec.rule = scenario.rule;
    const std::string name(models::to_string(spec.kind));
    try {
      const models::Model model(spec, data);
      posterior::FitOptions fo;
      fo.sampler = options.sampler;
      fo.stream = replicate;
      fo.parallel_chains = false;
      const posterior::Fit fit = posterior::fit(model, fo);
      const posterior::LorDraws lor = posterior::log_odds_ratio_draws(fit);
      for (int k = 0; k < scenario.K(); ++k) {
        const auto ku = static_cast<std::size_t>(k);
        const posterior::SubtrialSummary s = posterior::summarize(lor.lambda[ku], 0.95,
                                                                  posterior::IntervalKind::Hdi, k);
        ReplicateRow row;
        row.replicate = replicate;
        row.subtrial = k;
        row.model = name;
        row.lor_mean = s.lor_mean;
        row.hdi = s.lor_hdi;
        row.success = s.success;
        row.lor_variance = s.draw_variance;
        row.true_lor = trial.true_lor[ku];
        row.rhat_max = posterior::lambda_rhat(fit, lor, k);
        row.divergences = posterior::divergences(fit, k);
        row.transitions = fit.block(fit.block_of(k)).iterations * fit.block(fit.block_of(k)).chains.size();
        row.clamps = lor.clamps;
        row.flagged = static_cast<double>(row.divergences) > 0.01 * static_cast<double>(row.transitions) ||
                      !(row.rhat_max <= 1.05);
        out.rows.push_back(row);
      }
    } catch (const std::exception& e) {
      out.failures.push_back({replicate, name, e.what()});
    }
  }
  return out;
}

}  // namespace

unsigned default_workers() {
  if (const char* env = std::getenv("ABBA_WORKERS")) {
    try {
      const int v = std::stoi(env);
      if (v >= 1) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

SimulationReport run_replicates(const ScenarioSpec& scenario, const ReplicateOptions& options) {
  scenario.validate();
  if (!scenario.calibrated) throw ValidationError("simulate: scenario " + scenario.name + " is not calibrated");
  if (options.replicates < 1) throw ValidationError("simulate: at least one replicate is required");
  if (options.models.empty()) throw ValidationError("simulate: no models requested");
  options.sampler.validate();
  for (const auto& m : options.models) m.priors.validate();

  std::vector<ReplicateResult> results(options.replicates);
  std::atomic<std::size_t> next{0}, done{0};
  std::mutex error_mutex;
  std::exception_ptr error;

  const auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= options.replicates) return;
      try {
        results[i] = run_one(scenario, options, options.first_replicate + i);
      } catch (...) {
        const std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
      const std::size_t d = done.fetch_add(1) + 1;
      if (options.progress) options.progress(d, options.replicates);
    }
  };
  const unsigned workers =
      std::max(1u, std::min<unsigned>(options.workers, static_cast<unsigned>(options.replicates)));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);

  SimulationReport report;
  report.scenario = scenario;
  report.requested = options.replicates;
  for (auto& r : results) {
    report.rows.insert(report.rows.end(), r.rows.begin(), r.rows.end());
    report.failures.insert(report.failures.end(), r.failures.begin(), r.failures.end());
  }

  const double attempted = static_cast<double>(options.replicates * options.models.size());
  if (static_cast<double>(report.failures.size()) > options.max_failure_fraction * attempted) {
    std::string msg = "simulate: " + std::to_string(report.failures.size()) + " of " +
                      std::to_string(static_cast<std::size_t>(attempted)) + " fits failed";
    if (!report.failures.empty()) msg += "; first: " + report.failures.front().message;
    throw ReplicateFailure(msg);
  }

  std::vector<std::string> seen;
  for (const auto& spec : options.models) {
    const std::string name(models::to_string(spec.kind));
    if (std::find(seen.begin(), seen.end(), name) != seen.end()) continue;
    seen.push_back(name);
    for (int k = 0; k < scenario.K(); ++k) {
      std::vector<ReplicateRow> subset;
      for (const auto& row : report.rows) {
        if (row.model == name && row.subtrial == k) subset.push_back(row);
      }
      if (subset.empty()) continue;
      const SubtrialParams& p = scenario.subtrials[static_cast<std::size_t>(k)];
      report.metrics.push_back(compute_metrics(subset, p.true_lor, p.null_effect()));
    }
  }
  return report;
}

}  // namespace abba::simlab

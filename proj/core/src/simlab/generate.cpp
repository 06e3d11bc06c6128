#include "abba/simlab/generate.hpp"

#include <cmath>

#include "abba/errors.hpp"
#include "abba/numkit/orthant.hpp"
#include "abba/posterior/lor.hpp"

namespace abba::simlab {

namespace {
constexpr std::uint64_t kDataTag = 0xDA7A5E7ull;
}

std::vector<models::SubjectRecord> generate_dataset(const ScenarioSpec& spec,
                                                    const BaselineModel& baseline, numkit::Rng& rng) {
  if (!spec.calibrated) throw ValidationError("generate: scenario " + spec.name + " is not calibrated");
  spec.validate();
  const numkit::Cov2 cov(spec.sigma1, numkit::Correlation2(spec.rho));
  std::vector<models::SubjectRecord> out;
  out.reserve(static_cast<std::size_t>(spec.K() * 2 * spec.n_per_arm));
  for (int k = 0; k < spec.K(); ++k) {
    const SubtrialParams& p = spec.subtrials[static_cast<std::size_t>(k)];
    for (int t = 0; t <= 1; ++t) {
      for (int i = 0; i < spec.n_per_arm; ++i) {
        const double lx = baseline.sample_log(rng);
        const double mu1 = p.beta[0] + p.gamma[0] * lx + p.theta[0] * t;
        const double mu2 = p.beta[1] + p.gamma[1] * lx + p.theta[1] * t;
        const auto [y1, ystar] = numkit::sample_bvn(mu1, mu2, cov, rng);
        out.push_back({k, t, std::exp(lx), y1, ystar <= 0.0 ? 1 : 0});
      }
    }
  }
  return out;
}

SimulatedTrial simulate_trial(const ScenarioSpec& spec, const BaselineModel& baseline,
                              std::uint64_t seed, std::uint64_t replicate) {
  numkit::Rng rng(seed, {kDataTag, replicate});
  SimulatedTrial trial;
  trial.records = generate_dataset(spec, baseline, rng);
  const auto K = static_cast<std::size_t>(spec.K());
  trial.true_rates.assign(K, {0.0, 0.0});
  trial.observed_rates.assign(K, {0.0, 0.0});
  std::vector<Pair> counts(K, {0.0, 0.0});
  for (const models::SubjectRecord& s : trial.records) {
    const SubtrialParams& p = spec.subtrials[static_cast<std::size_t>(s.subtrial)];
    const double lx = std::log(s.baseline);
    const double mu1 = p.beta[0] + p.gamma[0] * lx + p.theta[0] * s.treatment;
    const double mu2 = p.beta[1] + p.gamma[1] * lx + p.theta[1] * s.treatment;
    const auto k = static_cast<std::size_t>(s.subtrial);
    const auto t = static_cast<std::size_t>(s.treatment);
    trial.true_rates[k][t] += posterior::abba_success_probability(mu1, mu2, spec.sigma1, spec.rho, spec.rule);
    trial.observed_rates[k][t] += models::is_responder(s, spec.rule) ? 1.0 : 0.0;
    counts[k][t] += 1.0;
  }
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t t = 0; t < 2; ++t) {
      trial.true_rates[k][t] /= counts[k][t];
      trial.observed_rates[k][t] /= counts[k][t];
    }
    const double rc = trial.true_rates[k][0], rt = trial.true_rates[k][1];
    trial.true_lor.push_back(std::log(rt / (1.0 - rt)) - std::log(rc / (1.0 - rc)));
  }
  return trial;
}

}  // namespace abba::simlab

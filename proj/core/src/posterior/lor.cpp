#include "abba/posterior/lor.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <string>

#include "abba/errors.hpp"
#include "abba/numkit/densities.hpp"
#include "abba/numkit/normal.hpp"
#include "abba/numkit/orthant.hpp"
#include "abba/sampler/diagnostics.hpp"

namespace abba::posterior {
namespace {

constexpr double kClampLow = 1e-12;
constexpr double kClampHigh = 1.0 - 1e-12;

double abba_probability(std::span<const double> x, const models::ParameterLayout& layout, int k,
                        double log_x, int t, const models::ResponderRule& rule) {
  const std::size_t r = layout.regression(k);
  // Treatment term first: relabelling arms with beta' = beta + theta, theta' = -theta then
  // reproduces the same predictors bit for bit when beta + theta is exact.
  const double mu1 = (x[r + 0] + x[r + 4] * t) + x[r + 2] * log_x;
  const double mu2 = (x[r + 1] + x[r + 5] * t) + x[r + 3] * log_x;
  const double sigma1 = layout.constrain(layout.sigma1(k), x[layout.sigma1(k)]);
  const double rho = layout.constrain(layout.rho(k), x[layout.rho(k)]);
  return abba_success_probability(mu1, mu2, sigma1, rho, rule);
}

double bin_probability(std::span<const double> x, const models::ParameterLayout& layout, int k,
                       double log_x, int t) {
  const std::size_t r = layout.regression(k);
  return numkit::inv_logit((x[r] + x[r + 2] * t) + x[r + 1] * log_x);
}

double clamp_rate(double r, std::size_t& clamps) {
  if (r < kClampLow || r > kClampHigh || std::isnan(r)) {
    ++clamps;
    return std::isnan(r) ? 0.5 : std::clamp(r, kClampLow, kClampHigh);
  }
  return r;
}

}  // namespace

double abba_success_probability(double mu1, double mu2, double sigma1, double rho,
                                const models::ResponderRule& rule) {
  const double z = (rule.threshold - mu1) / sigma1;
  if (!rule.success_requires_no_failure) {
    return rule.direction == models::Direction::Above ? numkit::std_normal_cdf(-z)
                                                      : numkit::std_normal_cdf(z);
  }
  if (rule.direction == models::Direction::Above) return numkit::std_bvn_upper(z, -mu2, rho);
  // P(Y1 < c, Y* > 0): reflect the first coordinate instead of subtracting from P(Y* > 0).
  return numkit::std_bvn_upper(-z, -mu2, -rho);
}

double success_probability_abba(const models::ParameterVector& draw,
                                const models::SubjectRecord& subject,
                                const models::ResponderRule& rule) {
  return abba_probability(draw.unconstrained(), draw.layout(), subject.subtrial,
                          std::log(subject.baseline), subject.treatment, rule);
}

double success_probability_bin(const models::ParameterVector& draw,
                               const models::SubjectRecord& subject) {
  return bin_probability(draw.unconstrained(), draw.layout(), subject.subtrial,
                         std::log(subject.baseline), subject.treatment);
}

LorDraws log_odds_ratio_draws(const sampler::PosteriorDraws& draws,
                              const models::ParameterLayout& layout, const models::Dataset& data,
                              const models::ModelSpec& spec, ArmAveraging averaging) {
  const int K = data.subtrials();
  for (int k = 0; k < K; ++k) {
    for (int t = 0; t <= 1; ++t) {
      if (data.arm_size(k, t) == 0) {
        throw ValidationError("subtrial " + std::to_string(k) + ": " +
                              (t == 1 ? "treatment" : "control") +
                              " arm is empty; log odds ratio undefined");
      }
    }
  }
  const bool abba = models::is_abba(spec.kind);
  // Subjects entering each arm average, ordered by baseline so the sums do not depend on the
  // order of the input records.
  std::vector<std::array<std::vector<double>, 2>> arm_baselines(static_cast<std::size_t>(K));
  for (int k = 0; k < K; ++k) {
    for (std::size_t i : data.members(k)) {
      for (int t = 0; t <= 1; ++t) {
        if (averaging == ArmAveraging::Observed && data[i].treatment != t) continue;
        arm_baselines[static_cast<std::size_t>(k)][static_cast<std::size_t>(t)].push_back(data.log_baseline(i));
      }
    }
    for (auto& v : arm_baselines[static_cast<std::size_t>(k)]) std::sort(v.begin(), v.end());
  }

  LorDraws out;
  out.chains = draws.chains.size();
  out.lambda.assign(static_cast<std::size_t>(K), {});
  for (auto& l : out.lambda) l.reserve(draws.chains.size() * draws.iterations);

  for (std::size_t c = 0; c < draws.chains.size(); ++c) {
    for (std::size_t it = 0; it < draws.iterations; ++it) {
      const std::span<const double> x(&draws.chains[c].draws[it * draws.dimension], draws.dimension);
      for (int k = 0; k < K; ++k) {
        double rate[2];
        for (int t = 0; t <= 1; ++t) {
          const auto& lxs = arm_baselines[static_cast<std::size_t>(k)][static_cast<std::size_t>(t)];
          double sum = 0.0;
          for (double lx : lxs) {
            sum += abba ? abba_probability(x, layout, k, lx, t, spec.rule) : bin_probability(x, layout, k, lx, t);
          }
          rate[t] = clamp_rate(sum / static_cast<double>(lxs.size()), out.clamps);
        }
        out.lambda[static_cast<std::size_t>(k)].push_back(std::log(rate[1] / (1.0 - rate[1])) -
                                                          std::log(rate[0] / (1.0 - rate[0])));
      }
    }
  }
  return out;
}

LorDraws log_odds_ratio_draws(const Fit& fit, ArmAveraging averaging) {
  const models::Model& m = fit.model();
  return log_odds_ratio_draws(fit.draws(), *m.layout(), m.data(), m.spec(), averaging);
}

SubtrialSummary summarize(std::span<const double> lambda, double mass, IntervalKind kind,
                          int subtrial) {
  if (lambda.empty()) throw ValidationError("summarize: no draws");
  SubtrialSummary s;
  s.subtrial = subtrial;
  s.draw_count = lambda.size();
  const double n = static_cast<double>(lambda.size());
  s.lor_mean = std::accumulate(lambda.begin(), lambda.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : lambda) ss += (v - s.lor_mean) * (v - s.lor_mean);
  s.draw_variance = lambda.size() > 1 ? ss / (n - 1.0) : 0.0;
  s.lor_hdi = kind == IntervalKind::Hdi ? numkit::hdi(lambda, mass)
                                        : numkit::equal_tailed_interval(lambda, mass);
  s.success = s.lor_hdi.low > 0.0;
  s.multimodal_warning = !s.lor_hdi.contains(s.lor_mean);
  return s;
}

double lambda_rhat(const Fit& fit, const LorDraws& lor, int k) {
  const sampler::PosteriorDraws& draws = fit.draws();
  const models::ParameterLayout& layout = *fit.model().layout();
  const std::size_t n = draws.iterations;

  std::vector<std::vector<double>> chains(draws.chains.size());
  const auto& lk = lor.lambda[static_cast<std::size_t>(k)];
  for (std::size_t c = 0; c < chains.size(); ++c) {
    chains[c].assign(lk.begin() + static_cast<std::ptrdiff_t>(c * n),
                     lk.begin() + static_cast<std::ptrdiff_t>((c + 1) * n));
  }
  double worst = sampler::split_rhat(chains);

  std::vector<std::size_t> params;
  for (std::size_t j = 0; j < layout.block_width(); ++j) params.push_back(layout.regression(k) + j);
  if (models::is_abba(layout.kind())) {
    params.push_back(layout.sigma1(k));
    params.push_back(layout.rho(k));
  }
  for (std::size_t p : params) {
    for (std::size_t c = 0; c < chains.size(); ++c) chains[c] = draws.column(p, c);
    const double r = sampler::split_rhat(chains);
    if (std::isnan(r) || r > worst) worst = r;
  }
  return worst;
}

std::size_t divergences(const Fit& fit, int k) { return fit.block(fit.block_of(k)).divergences(); }

}  // namespace abba::posterior

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "abba/models/data.hpp"
#include "abba/models/layout.hpp"
#include "abba/models/spec.hpp"
#include "abba/numkit/hdi.hpp"
#include "abba/posterior/fit.hpp"
#include "abba/sampler/nuts.hpp"

namespace abba::posterior {

/// Responder probability of a subject whose outcome pair has means (mu1, mu2), continuous sd
/// sigma1 and latent correlation rho.
double abba_success_probability(double mu1, double mu2, double sigma1, double rho,
                                const models::ResponderRule& rule);

/// P(responder | parameters) for one subject under an ABBA-kind draw: the continuous score
/// passes the threshold and, when the rule requires it, the latent variable is positive.
double success_probability_abba(const models::ParameterVector& draw,
                                const models::SubjectRecord& subject,
                                const models::ResponderRule& rule);

/// inv_logit of the subject's linear predictor under a BIN-kind draw.
double success_probability_bin(const models::ParameterVector& draw,
                               const models::SubjectRecord& subject);

/// Which covariates the arm-level response rates average over.
enum class ArmAveraging {
  Observed,        ///< members of the arm at their own baselines
  Counterfactual,  ///< every member of the subtrial, with the arm label imposed
};

struct LorDraws {
  /// lambda[k][d]: log odds ratio of subtrial k at draw d (chains concatenated in order).
  std::vector<std::vector<double>> lambda;
  /// Number of arm rates clamped to [1e-12, 1 - 1e-12].
  std::size_t clamps = 0;
  std::size_t chains = 0;
};

/// Per-draw log odds ratios of every subtrial. `draws` use the coordinates of `layout`.
/// Throws ValidationError when a subtrial arm has no subjects.
LorDraws log_odds_ratio_draws(const sampler::PosteriorDraws& draws,
                              const models::ParameterLayout& layout, const models::Dataset& data,
                              const models::ModelSpec& spec,
                              ArmAveraging averaging = ArmAveraging::Observed);

LorDraws log_odds_ratio_draws(const Fit& fit, ArmAveraging averaging = ArmAveraging::Observed);

enum class IntervalKind { Hdi, EqualTailed };

struct SubtrialSummary {
  int subtrial = 0;
  double lor_mean = 0.0;
  numkit::HdInterval lor_hdi{};
  bool success = false;  ///< lower interval limit above 0
  std::size_t draw_count = 0;
  double draw_variance = 0.0;
  /// Mean outside the interval, a sign of a multimodal draw set.
  bool multimodal_warning = false;
};

SubtrialSummary summarize(std::span<const double> lambda, double mass = 0.95,
                          IntervalKind kind = IntervalKind::Hdi, int subtrial = 0);

/// Largest split-R-hat over subtrial k's log odds ratio and the parameters it depends on.
double lambda_rhat(const Fit& fit, const LorDraws& lor, int k);

/// Divergent transitions in the sampler run that produced subtrial k.
std::size_t divergences(const Fit& fit, int k);

}  // namespace abba::posterior

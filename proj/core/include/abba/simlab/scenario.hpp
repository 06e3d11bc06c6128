#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "abba/models/data.hpp"
#include "abba/numkit/random.hpp"

namespace abba::simlab {

/// Pair of coefficients (continuous component, latent component).
using Pair = std::array<double, 2>;

struct SubtrialParams {
  Pair beta{0.0, 0.0};        ///< intercepts used for generation (after calibration)
  Pair gamma{0.0, 0.0};       ///< log-baseline effects
  Pair theta{0.0, 0.0};       ///< treatment effects
  Pair initial_beta{0.0, 0.0};  ///< intercepts before calibration, kept as metadata and as the search start
  double target_rr_control = 0.2;
  double target_rr_treatment = 0.2;
  double true_lor = 0.0;  ///< reference log odds ratio for coverage

  bool null_effect() const noexcept { return theta[0] == 0.0 && theta[1] == 0.0; }
};

struct ScenarioSpec {
  std::string name;
  std::vector<SubtrialParams> subtrials;
  double sigma1 = 0.5;
  double rho = 0.3;
  int n_per_arm = 25;
  models::ResponderRule rule{};
  bool calibrated = false;  ///< beta holds calibrated intercepts

  int K() const noexcept { return static_cast<int>(subtrials.size()); }
  /// Throws MalformedInput when a field is out of range.
  void validate() const;
};

/// Distribution of the positive baseline covariate: log x ~ Normal(log_mean, log_sd).
struct BaselineModel {
  double log_mean = 0.0;
  double log_sd = 1.0;

  void validate() const;
  double sample_log(numkit::Rng& rng) const { return log_mean + log_sd * rng.normal(); }
};

/// The eight simulation scenarios, keyed "scenario1" ... "scenario8". Uncalibrated.
const std::map<std::string, ScenarioSpec>& scenario_library();

/// Accepts "scenario4", "s4" or "4".
std::optional<ScenarioSpec> find_scenario(const std::string& name);

}  // namespace abba::simlab

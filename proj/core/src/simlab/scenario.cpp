#include "abba/simlab/scenario.hpp"

#include <cmath>

#include "abba/errors.hpp"

namespace abba::simlab {
namespace {

// Row of the published parameter table: reference LOR, control and treatment response rates,
// beta, gamma, theta.
SubtrialParams row(double lor, double rr_c, double rr_t, Pair beta, Pair gamma, Pair theta) {
  SubtrialParams p;
  p.true_lor = lor;
  p.target_rr_control = rr_c;
  p.target_rr_treatment = rr_t;
  p.initial_beta = beta;
  p.beta = beta;
  p.gamma = gamma;
  p.theta = theta;
  return p;
}

ScenarioSpec scenario(std::string name, std::vector<SubtrialParams> rows) {
  ScenarioSpec s;
  s.name = std::move(name);
  s.subtrials = std::move(rows);
  return s;
}

std::map<std::string, ScenarioSpec> build_library() {
  std::map<std::string, ScenarioSpec> lib;
  const auto add = [&](ScenarioSpec s) { lib.emplace(s.name, std::move(s)); };

  const SubtrialParams s1 = row(0.0, 0.2, 0.2, {1.07, 0.04}, {0.5, -0.1}, {0.0, 0.0});
  add(scenario("scenario1", {s1, s1, s1}));

  add(scenario("scenario2", {row(0.99, 0.19, 0.39, {0.84, 0.39}, {0.5, -0.1}, {0.7, 0.0}),
                             row(0.98, 0.19, 0.39, {0.84, 0.39}, {0.5, -0.1}, {0.7, 0.0}),
                             row(0.99, 0.19, 0.39, {0.84, 0.39}, {0.5, -0.1}, {0.7, 0.0})}));

  const SubtrialParams s3 = row(0.67, 0.24, 0.38, {2.91, 0.22}, {0.0, -0.1}, {0.0, 1.0});
  add(scenario("scenario3", {s3, s3, s3}));

  const SubtrialParams s4 = row(1.00, 0.19, 0.39, {0.93, 0.18}, {0.5, -0.1}, {0.5, 0.3});
  add(scenario("scenario4", {s4, s4, s4}));

  const SubtrialParams s5 = row(0.90, 0.2, 0.38, {0.24, 0.52}, {0.7, -0.2}, {0.4, 0.4});
  add(scenario("scenario5", {s5, s5, row(-0.01, 0.27, 0.27, {0.56, 0.56}, {0.7, -0.2}, {0.0, 0.0})}));

  const SubtrialParams s6 = row(0.0, 0.30, 0.30, {1.15, 0.002}, {0.5, 0.0}, {0.0, 0.0});
  add(scenario("scenario6", {s6, s6, row(0.94, 0.23, 0.43, {1.04, -0.17}, {0.5, 0.0}, {0.4, 0.4})}));

  add(scenario("scenario7", {row(0.42, 0.28, 0.37, {0.90, 0.94}, {0.5, -0.1}, {0.5, -0.5}),
                             row(0.75, 0.22, 0.37, {0.90, 0.43}, {0.5, -0.1}, {0.5, 0.0}),
                             row(1.19, 0.21, 0.46, {0.98, 0.18}, {0.5, -0.1}, {0.5, 0.5})}));

  add(scenario("scenario8", {row(0.81, 0.21, 0.38, {1.28, 1.11}, {0.5, -0.4}, {-0.2, 1.2}),
                             row(1.06, 0.2, 0.42, {1.14, 1.16}, {0.5, -0.4}, {0.0, 1.2}),
                             row(1.43, 0.2, 0.51, {1.14, 1.18}, {0.5, -0.4}, {0.2, 1.2})}));
  return lib;
}

bool finite_pair(const Pair& p) { return std::isfinite(p[0]) && std::isfinite(p[1]); }

}  // namespace

void ScenarioSpec::validate() const {
  const std::string where = "scenario " + (name.empty() ? std::string("<unnamed>") : name) + ": ";
  if (subtrials.empty()) throw MalformedInput(where + "at least one subtrial is required");
  if (n_per_arm < 1) throw MalformedInput(where + "n_per_arm must be at least 1");
  if (!(sigma1 > 0.0) || !std::isfinite(sigma1)) throw MalformedInput(where + "sigma1 must be positive");
  if (!(std::abs(rho) < 1.0)) throw MalformedInput(where + "rho must lie in (-1, 1)");
  if (!std::isfinite(rule.threshold)) throw MalformedInput(where + "threshold must be finite");
  for (std::size_t k = 0; k < subtrials.size(); ++k) {
    const SubtrialParams& p = subtrials[k];
    const std::string at = where + "subtrial " + std::to_string(k + 1) + ": ";
    if (!finite_pair(p.beta) || !finite_pair(p.gamma) || !finite_pair(p.theta) ||
        !finite_pair(p.initial_beta)) {
      throw MalformedInput(at + "coefficients must be finite");
    }
    for (double r : {p.target_rr_control, p.target_rr_treatment}) {
      if (!(r > 0.0 && r < 1.0)) throw MalformedInput(at + "target response rates must lie in (0, 1)");
    }
    if (!std::isfinite(p.true_lor)) throw MalformedInput(at + "true_lor must be finite");
  }
}

void BaselineModel::validate() const {
  if (!std::isfinite(log_mean)) throw MalformedInput("baseline: log_mean must be finite");
  if (!(log_sd > 0.0) || !std::isfinite(log_sd)) throw MalformedInput("baseline: log_sd must be positive");
}

const std::map<std::string, ScenarioSpec>& scenario_library() {
  static const std::map<std::string, ScenarioSpec> lib = build_library();
  return lib;
}

std::optional<ScenarioSpec> find_scenario(const std::string& name) {
  std::string key = name;
  if (key.rfind("scenario", 0) != 0) {
    if (!key.empty() && (key[0] == 's' || key[0] == 'S')) key = key.substr(1);
    key = "scenario" + key;
  }
  const auto& lib = scenario_library();
  const auto it = lib.find(key);
  if (it == lib.end()) return std::nullopt;
  return it->second;
}

}  // namespace abba::simlab

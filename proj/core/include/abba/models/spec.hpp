#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "abba/models/data.hpp"

namespace abba::models {

enum class ModelKind { AbbaHierarchical, AbbaStratified, BinHierarchical, BinStratified };

inline bool is_abba(ModelKind kind) {
  return kind == ModelKind::AbbaHierarchical || kind == ModelKind::AbbaStratified;
}
inline bool is_hierarchical(ModelKind kind) {
  return kind == ModelKind::AbbaHierarchical || kind == ModelKind::BinHierarchical;
}

/// Short names used on the command line and in reports: abba, abba-strat, bin, bin-strat.
std::string_view to_string(ModelKind kind);
std::optional<ModelKind> parse_model_kind(std::string_view name);

struct PriorConfig {
  double beta_gamma_sd = 5.0;      ///< intercept / baseline-effect normal priors
  double theta_sd = 10.0;          ///< treatment effects, stratified ABBA
  double level2_mean_sd = 5.0;     ///< hierarchy means
  double level2_rate = 2.0;        ///< exponential rate on hierarchy SDs
  double level2_lower_abba = 0.1;  ///< hierarchy SD floor, ABBA
  double level2_lower_bin = 0.3;   ///< hierarchy SD floor, BIN
  double lkj_eta = 5.0;
  double ig_shape = 0.5;  ///< sigma1 ~ IG(shape, scale)
  double ig_scale = 0.005;

  /// Throws ValidationError when a hyperparameter is non-positive (floors may be 0).
  void validate() const;
};

struct ModelSpec {
  ModelKind kind = ModelKind::AbbaHierarchical;
  int subtrials = 1;
  PriorConfig priors{};
  ResponderRule rule{};
};

}  // namespace abba::models

#pragma once

#include <memory>
#include <span>
#include <vector>

#include "abba/models/data.hpp"
#include "abba/models/layout.hpp"
#include "abba/models/spec.hpp"

namespace abba::models {

struct LinearPredictors {
  double mu1;  ///< mean of the continuous outcome
  double mu2;  ///< mean of the latent variable
};

/// Unnormalized log posterior of one of the four model kinds over a fixed dataset, in the
/// unconstrained coordinates of its ParameterLayout. Immutable; safe to share across threads.
///
/// ABBA kinds augment each subject with u_i in (0, 1). The latent value is reconstructed as
///   y*_i = m_i + s * Phi^-1(lower_i + u_i * mass_i)
/// where (m_i, s) are the mean and sd of y*_i | y_i1 and [lower_i, lower_i + mass_i] is the
/// probability window of the half-line selected by the latent sign. The truncated density times
/// the Jacobian |dy*/du| collapses to the window mass, so each subject contributes
///   log N(y_i1 | mu_i1, sigma1) + log Phi(+-m_i / s) + log u_i + log(1 - u_i).
class Model {
 public:
  /// Throws ValidationError when spec.subtrials differs from the dataset's.
  Model(ModelSpec spec, Dataset data);

  const ModelSpec& spec() const noexcept { return spec_; }
  const Dataset& data() const noexcept { return data_; }
  const std::shared_ptr<const ParameterLayout>& layout() const noexcept { return layout_; }
  std::size_t dimension() const noexcept { return layout_->dimension(); }
  const std::vector<int>& latent_signs() const noexcept { return signs_; }
  const std::vector<int>& responders() const noexcept { return responders_; }

  /// Full log posterior; -inf (never NaN) at the boundary of the parameter space.
  double log_density(std::span<const double> x) const;
  /// Log posterior and its gradient with respect to the unconstrained coordinates.
  double log_density_gradient(std::span<const double> x, std::span<double> grad) const;

  /// Data terms only. For ABBA kinds this includes the latent construction and the
  /// log-Jacobian of the u transform.
  double log_likelihood(std::span<const double> x) const;
  /// Priors plus log-Jacobians of the non-latent transforms.
  double log_prior(std::span<const double> x) const;

  LinearPredictors linear_predictors(std::span<const double> x, std::size_t subject) const;
  /// xi_i of the logistic model (BIN kinds).
  double bin_linear_predictor(std::span<const double> x, std::size_t subject) const;

  /// Reconstructed y*_i for every subject (ABBA kinds).
  std::vector<double> latent_values(std::span<const double> x) const;

  /// Independent single-subtrial model for block k of a stratified kind.
  Model subtrial_model(int k) const;

 private:
  double evaluate(std::span<const double> x, double* grad, bool likelihood, bool prior) const;
  double abba_likelihood(std::span<const double> x, double* grad) const;
  double bin_likelihood(std::span<const double> x, double* grad) const;
  double abba_prior(std::span<const double> x, double* grad) const;
  double bin_prior(std::span<const double> x, double* grad) const;
  double hierarchy_prior(std::span<const double> x, double* grad, double floor) const;
  double sigma_rho_prior(std::span<const double> x, double* grad, int k) const;

  ModelSpec spec_;
  Dataset data_;
  std::shared_ptr<const ParameterLayout> layout_;
  std::vector<int> signs_;
  std::vector<int> responders_;
};

// Free-function forms of the density operations.
double abba_log_posterior(const ModelSpec& spec, const Dataset& data, const ParameterVector& params);
double bin_log_posterior(const ModelSpec& spec, const Dataset& data, const ParameterVector& params);
std::vector<double> gradient(const ModelSpec& spec, const Dataset& data, const ParameterVector& params);

}  // namespace abba::models

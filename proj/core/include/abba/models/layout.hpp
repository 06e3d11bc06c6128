#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "abba/models/data.hpp"
#include "abba/models/spec.hpp"

namespace abba::models {

/// Map from an unconstrained coordinate to its constrained value.
enum class Transform : unsigned char {
  Identity,    ///< regression coefficients and hierarchy means
  Exp,         ///< sigma1
  FloorExp,    ///< hierarchy SDs: floor + exp(z)
  Tanh,        ///< correlation rho
  InvLogit,    ///< latent augmentation u in (0, 1)
};

/// Coordinate layout of the unconstrained sampling space. The dimension is a function of
/// (kind, K, subjects per subtrial).
///
/// Regression block per subtrial, ABBA: beta1 beta2 gamma1 gamma2 theta1 theta2; BIN: beta gamma theta.
///   AbbaHierarchical: [regression x K][means 6][sds 6][sigma1][rho][u_1..u_N]
///   AbbaStratified:   per subtrial k: [regression 6][sigma1][rho][u of k's subjects]
///   BinHierarchical:  [regression x K][means 3][sds 3]
///   BinStratified:    per subtrial k: [regression 3]
class ParameterLayout {
 public:
  ParameterLayout(const ModelSpec& spec, const Dataset& data);

  ModelKind kind() const noexcept { return kind_; }
  int subtrials() const noexcept { return subtrials_; }
  std::size_t dimension() const noexcept { return transforms_.size(); }
  /// Number of coefficients per regression block (6 for ABBA, 3 for BIN).
  std::size_t block_width() const noexcept { return is_abba(kind_) ? 6 : 3; }

  std::size_t regression(int k) const { return regression_[k]; }
  std::size_t hyper_mean() const noexcept { return hyper_mean_; }
  std::size_t hyper_sd() const noexcept { return hyper_sd_; }
  std::size_t sigma1(int k) const { return sigma1_[k]; }
  std::size_t rho(int k) const { return rho_[k]; }
  /// Coordinate of subject i's latent component (ABBA kinds only).
  std::size_t latent(std::size_t i) const { return latent_[i]; }
  bool has_latent() const noexcept { return !latent_.empty(); }

  /// Contiguous coordinate range that belongs to subtrial k alone (stratified kinds), or the
  /// whole vector (hierarchical kinds).
  std::size_t block_offset(int k) const { return block_offset_[k]; }
  std::size_t block_size(int k) const { return block_size_[k]; }

  Transform transform(std::size_t i) const { return transforms_[i]; }
  double floor(std::size_t i) const { return floors_[i]; }
  const std::vector<std::string>& names() const noexcept { return names_; }

  double constrain(std::size_t i, double z) const;
  double unconstrain(std::size_t i, double value) const;
  void constrain(std::span<const double> unconstrained, std::span<double> out) const;

 private:
  void push(std::string name, Transform t, double floor = 0.0);

  ModelKind kind_;
  int subtrials_;
  std::vector<std::size_t> regression_, sigma1_, rho_, latent_, block_offset_, block_size_;
  std::size_t hyper_mean_ = 0, hyper_sd_ = 0;
  std::vector<Transform> transforms_;
  std::vector<double> floors_;
  std::vector<std::string> names_;
};

/// A point of the sampling space: unconstrained storage plus constrained accessors.
class ParameterVector {
 public:
  /// Throws std::invalid_argument when the value count does not match the layout.
  ParameterVector(std::shared_ptr<const ParameterLayout> layout, std::vector<double> unconstrained);

  /// Builds from constrained values by applying the inverse transforms.
  static ParameterVector from_constrained(std::shared_ptr<const ParameterLayout> layout,
                                          std::span<const double> constrained);

  const ParameterLayout& layout() const noexcept { return *layout_; }
  std::span<const double> unconstrained() const noexcept { return values_; }
  std::vector<double>& mutable_unconstrained() noexcept { return values_; }
  double constrained(std::size_t i) const { return layout_->constrain(i, values_[i]); }
  std::vector<double> constrained() const;

  /// Regression coefficient c of subtrial k; c indexes the layout's regression block.
  double coefficient(int k, std::size_t c) const { return values_[layout_->regression(k) + c]; }
  double sigma1(int k = 0) const { return constrained(layout_->sigma1(k)); }
  double rho(int k = 0) const { return constrained(layout_->rho(k)); }
  double latent_u(std::size_t i) const { return constrained(layout_->latent(i)); }

 private:
  std::shared_ptr<const ParameterLayout> layout_;
  std::vector<double> values_;
};

}  // namespace abba::models

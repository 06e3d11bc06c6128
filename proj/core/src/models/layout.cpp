#include "abba/models/layout.hpp"

#include <cmath>
#include <stdexcept>
#include <string_view>

#include "abba/errors.hpp"
#include "abba/numkit/densities.hpp"

namespace abba::models {
namespace {

constexpr std::string_view kAbbaCoefficients[] = {"beta", "beta", "gamma", "gamma", "theta", "theta"};
constexpr std::string_view kBinCoefficients[] = {"beta", "gamma", "theta"};

std::string indexed(std::string_view base, int a) { return std::string(base) + "." + std::to_string(a); }
std::string indexed(std::string_view base, int a, int b) {
  return indexed(base, a) + "." + std::to_string(b);
}

}  // namespace

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::AbbaHierarchical: return "abba";
    case ModelKind::AbbaStratified: return "abba-strat";
    case ModelKind::BinHierarchical: return "bin";
    case ModelKind::BinStratified: return "bin-strat";
  }
  return "unknown";
}

std::optional<ModelKind> parse_model_kind(std::string_view name) {
  if (name == "abba" || name == "abba-hier") return ModelKind::AbbaHierarchical;
  if (name == "abba-strat" || name == "abbas") return ModelKind::AbbaStratified;
  if (name == "bin" || name == "bin-hier") return ModelKind::BinHierarchical;
  if (name == "bin-strat" || name == "bins") return ModelKind::BinStratified;
  return std::nullopt;
}

void PriorConfig::validate() const {
  const auto positive = [](double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw ValidationError(std::string("prior hyperparameter ") + what + " must be positive");
    }
  };
  positive(beta_gamma_sd, "beta_gamma_sd");
  positive(theta_sd, "theta_sd");
  positive(level2_mean_sd, "level2_mean_sd");
  positive(level2_rate, "level2_rate");
  positive(lkj_eta, "lkj_eta");
  positive(ig_shape, "ig_shape");
  positive(ig_scale, "ig_scale");
  if (!(level2_lower_abba >= 0.0) || !(level2_lower_bin >= 0.0)) {
    throw ValidationError("hierarchy SD floors must be non-negative");
  }
}

void ParameterLayout::push(std::string name, Transform t, double floor) {
  names_.push_back(std::move(name));
  transforms_.push_back(t);
  floors_.push_back(floor);
}

ParameterLayout::ParameterLayout(const ModelSpec& spec, const Dataset& data)
    : kind_(spec.kind), subtrials_(spec.subtrials) {
  if (spec.subtrials != data.subtrials()) {
    throw ValidationError("model spec has " + std::to_string(spec.subtrials) +
                          " subtrials but the dataset has " + std::to_string(data.subtrials()));
  }
  const int K = subtrials_;
  regression_.resize(K);
  sigma1_.assign(K, 0);
  rho_.assign(K, 0);
  block_offset_.assign(K, 0);
  block_size_.assign(K, 0);

  const bool abba = is_abba(kind_);
  const auto push_regression = [&](int k) {
    regression_[k] = dimension();
    if (abba) {
      for (int c = 0; c < 6; ++c) push(indexed(kAbbaCoefficients[c], k + 1, c % 2 + 1), Transform::Identity);
    } else {
      for (const auto base : kBinCoefficients) push(indexed(base, k + 1), Transform::Identity);
    }
  };

  if (is_hierarchical(kind_)) {
    for (int k = 0; k < K; ++k) push_regression(k);
    const double floor = abba ? spec.priors.level2_lower_abba : spec.priors.level2_lower_bin;
    hyper_mean_ = dimension();
    for (std::size_t c = 0; c < block_width(); ++c) {
      const auto base = abba ? kAbbaCoefficients[c] : kBinCoefficients[c];
      push(abba ? indexed(std::string("mu_") + std::string(base), static_cast<int>(c % 2 + 1))
                : std::string("mu_") + std::string(base),
           Transform::Identity);
    }
    hyper_sd_ = dimension();
    for (std::size_t c = 0; c < block_width(); ++c) {
      const auto base = abba ? kAbbaCoefficients[c] : kBinCoefficients[c];
      push(abba ? indexed(std::string("sigma_") + std::string(base), static_cast<int>(c % 2 + 1))
                : std::string("sigma_") + std::string(base),
           Transform::FloorExp, floor);
    }
    if (abba) {
      const std::size_t s = dimension();
      push("sigma1", Transform::Exp);
      const std::size_t r = dimension();
      push("rho", Transform::Tanh);
      sigma1_.assign(K, s);
      rho_.assign(K, r);
      latent_.resize(data.size());
      for (std::size_t i = 0; i < data.size(); ++i) {
        latent_[i] = dimension();
        push(indexed("u", static_cast<int>(i + 1)), Transform::InvLogit);
      }
    }
    block_size_.assign(K, dimension());
  } else {
    if (abba) latent_.resize(data.size());
    for (int k = 0; k < K; ++k) {
      block_offset_[k] = dimension();
      push_regression(k);
      if (abba) {
        sigma1_[k] = dimension();
        push(indexed("sigma1", k + 1), Transform::Exp);
        rho_[k] = dimension();
        push(indexed("rho", k + 1), Transform::Tanh);
        for (const std::size_t i : data.members(k)) {
          latent_[i] = dimension();
          push(indexed("u", static_cast<int>(i + 1)), Transform::InvLogit);
        }
      }
      block_size_[k] = dimension() - block_offset_[k];
    }
  }
}

double ParameterLayout::constrain(std::size_t i, double z) const {
  switch (transforms_[i]) {
    case Transform::Identity: return z;
    case Transform::Exp: return std::exp(z);
    case Transform::FloorExp: return floors_[i] + std::exp(z);
    case Transform::Tanh: return std::tanh(z);
    case Transform::InvLogit: return numkit::inv_logit(z);
  }
  return z;
}

double ParameterLayout::unconstrain(std::size_t i, double value) const {
  switch (transforms_[i]) {
    case Transform::Identity: return value;
    case Transform::Exp: return std::log(value);
    case Transform::FloorExp: return std::log(value - floors_[i]);
    case Transform::Tanh: return std::atanh(value);
    case Transform::InvLogit: return numkit::logit(value);
  }
  return value;
}

void ParameterLayout::constrain(std::span<const double> unconstrained, std::span<double> out) const {
  for (std::size_t i = 0; i < transforms_.size(); ++i) out[i] = constrain(i, unconstrained[i]);
}

ParameterVector::ParameterVector(std::shared_ptr<const ParameterLayout> layout,
                                 std::vector<double> unconstrained)
    : layout_(std::move(layout)), values_(std::move(unconstrained)) {
  if (values_.size() != layout_->dimension()) {
    throw std::invalid_argument("parameter vector has " + std::to_string(values_.size()) +
                                " coordinates, layout expects " +
                                std::to_string(layout_->dimension()));
  }
}

ParameterVector ParameterVector::from_constrained(std::shared_ptr<const ParameterLayout> layout,
                                                  std::span<const double> constrained) {
  std::vector<double> z(constrained.size());
  for (std::size_t i = 0; i < z.size() && i < layout->dimension(); ++i) {
    z[i] = layout->unconstrain(i, constrained[i]);
  }
  return ParameterVector(std::move(layout), std::move(z));
}

std::vector<double> ParameterVector::constrained() const {
  std::vector<double> out(values_.size());
  layout_->constrain(values_, out);
  return out;
}

}  // namespace abba::models

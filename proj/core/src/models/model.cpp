#include "abba/models/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "abba/errors.hpp"
#include "abba/numkit/densities.hpp"
#include "abba/numkit/normal.hpp"

namespace abba::models {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// log(1 - tanh(z)^2), stable for large |z|.
double log1m_tanh_sq(double z) {
  const double a = std::abs(z);
  return 2.0 * (std::numbers::ln2 - a - numkit::softplus(-2.0 * a));
}


}  // namespace

Model::Model(ModelSpec spec, Dataset data)
    : spec_(std::move(spec)), data_(std::move(data)) {
  spec_.priors.validate();
  layout_ = std::make_shared<const ParameterLayout>(spec_, data_);
  signs_ = latent_sign_indicators(data_.records(), spec_.rule);
  responders_.reserve(data_.size());
  for (const auto& r : data_.records()) responders_.push_back(is_responder(r, spec_.rule) ? 1 : 0);
}

double Model::log_density(std::span<const double> x) const {
  return evaluate(x, nullptr, true, true);
}

double Model::log_density_gradient(std::span<const double> x, std::span<double> grad) const {
  std::fill(grad.begin(), grad.end(), 0.0);
  return evaluate(x, grad.data(), true, true);
}

double Model::log_likelihood(std::span<const double> x) const {
  return evaluate(x, nullptr, true, false);
}

double Model::log_prior(std::span<const double> x) const {
  return evaluate(x, nullptr, false, true);
}

double Model::evaluate(std::span<const double> x, double* grad, bool likelihood, bool prior) const {
  double lp = 0.0;
  if (is_abba(spec_.kind)) {
    if (likelihood) lp += abba_likelihood(x, grad);
    if (prior) lp += abba_prior(x, grad);
  } else {
    if (likelihood) lp += bin_likelihood(x, grad);
    if (prior) lp += bin_prior(x, grad);
  }
  if (!std::isfinite(lp)) return kNegInf;
  if (grad != nullptr) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (!std::isfinite(grad[i])) return kNegInf;
    }
  }
  return lp;
}

LinearPredictors Model::linear_predictors(std::span<const double> x, std::size_t subject) const {
  const SubjectRecord& s = data_[subject];
  const double* b = x.data() + layout_->regression(s.subtrial);
  const double lx = data_.log_baseline(subject);
  return {b[0] + b[2] * lx + b[4] * s.treatment, b[1] + b[3] * lx + b[5] * s.treatment};
}

double Model::bin_linear_predictor(std::span<const double> x, std::size_t subject) const {
  const SubjectRecord& s = data_[subject];
  const double* b = x.data() + layout_->regression(s.subtrial);
  return b[0] + b[1] * data_.log_baseline(subject) + b[2] * s.treatment;
}

double Model::abba_likelihood(std::span<const double> x, double* grad) const {
  const ParameterLayout& L = *layout_;
  const int K = L.subtrials();
  // Constrained sigma1 / rho and their accumulated partial derivatives, per block.
  std::vector<double> sigma(K), rho(K), dsigma(K, 0.0), drho(K, 0.0);
  for (int k = 0; k < K; ++k) {
    sigma[k] = std::exp(x[L.sigma1(k)]);
    rho[k] = std::tanh(x[L.rho(k)]);
  }

  double lp = 0.0;
  for (std::size_t i = 0; i < data_.size(); ++i) {
    const SubjectRecord& subj = data_[i];
    const int k = subj.subtrial;
    const std::size_t off = L.regression(k);
    const double* b = x.data() + off;
    const double lx = data_.log_baseline(i);
    const double t = subj.treatment;
    const double s1 = sigma[k];
    const double r = rho[k];
    const double s = std::sqrt(1.0 - r * r);

    const double mu1 = b[0] + b[2] * lx + b[4] * t;
    const double mu2 = b[1] + b[3] * lx + b[5] * t;
    const double zr = (subj.y_continuous - mu1) / s1;
    const double m = mu2 + r * zr;  // E[y* | y1]
    const double sg = signs_[i] == 1 ? 1.0 : -1.0;
    const double z = sg * m / s;
    const double u_z = x[L.latent(i)];

    lp += -std::log(s1) - 0.5 * zr * zr - numkit::kLogSqrt2Pi;
    const numkit::LogCdfMills tail = numkit::log_cdf_and_mills(z);
    // log u + log(1 - u) for u = inv_logit(u_z), sharing exp(-|u_z|) with the gradient.
    const double e = std::exp(-std::abs(u_z));
    lp += tail.log_cdf;
    lp += -std::abs(u_z) - 2.0 * std::log1p(e);

    if (grad != nullptr) {
      const double w = tail.mills;
      const double gm = w * sg / s;
      const double d_mu2 = gm;
      const double d_mu1 = zr / s1 - gm * r / s1;
      double* g = grad + off;
      g[0] += d_mu1;
      g[1] += d_mu2;
      g[2] += d_mu1 * lx;
      g[3] += d_mu2 * lx;
      g[4] += d_mu1 * t;
      g[5] += d_mu2 * t;
      dsigma[k] += -1.0 / s1 + zr * zr / s1 - gm * r * zr / s1;
      drho[k] += gm * zr + w * sg * m * r / (s * s * s);
      const double u = u_z >= 0.0 ? 1.0 / (1.0 + e) : e / (1.0 + e);
      grad[L.latent(i)] += 1.0 - 2.0 * u;
    }
  }
  if (grad != nullptr) {
    for (int k = 0; k < K; ++k) {
      grad[L.sigma1(k)] += sigma[k] * dsigma[k];
      grad[L.rho(k)] += (1.0 - rho[k] * rho[k]) * drho[k];
    }
  }
  return lp;
}

double Model::bin_likelihood(std::span<const double> x, double* grad) const {
  const ParameterLayout& L = *layout_;
  double lp = 0.0;
  for (std::size_t i = 0; i < data_.size(); ++i) {
    const SubjectRecord& subj = data_[i];
    const std::size_t off = L.regression(subj.subtrial);
    const double lx = data_.log_baseline(i);
    const double xi = x[off] + x[off + 1] * lx + x[off + 2] * subj.treatment;
    const double y = responders_[i];
    lp += y * xi - numkit::softplus(xi);
    if (grad != nullptr) {
      const double d = y - numkit::inv_logit(xi);
      grad[off] += d;
      grad[off + 1] += d * lx;
      grad[off + 2] += d * subj.treatment;
    }
  }
  return lp;
}

double Model::hierarchy_prior(std::span<const double> x, double* grad, double floor) const {
  const ParameterLayout& L = *layout_;
  const PriorConfig& P = spec_.priors;
  const std::size_t width = L.block_width();
  const std::size_t mean0 = L.hyper_mean();
  const std::size_t sd0 = L.hyper_sd();
  double lp = 0.0;
  for (std::size_t c = 0; c < width; ++c) {
    const double mu = x[mean0 + c];
    const double z = x[sd0 + c];
    const double excess = std::exp(z);
    const double tau = floor + excess;
    double dtau = 0.0;
    double dmu = 0.0;
    for (int k = 0; k < L.subtrials(); ++k) {
      const std::size_t idx = L.regression(k) + c;
      const double dev = (x[idx] - mu) / tau;
      lp += -std::log(tau) - 0.5 * dev * dev;
      if (grad != nullptr) {
        grad[idx] -= dev / tau;
        dmu += dev / tau;
        dtau += (-1.0 + dev * dev) / tau;
      }
    }
    // Level 2: normal hierarchy mean, shifted exponential SD, log-Jacobian z.
    lp += -0.5 * mu * mu / (P.level2_mean_sd * P.level2_mean_sd);
    lp += -P.level2_rate * excess + z;
    if (grad != nullptr) {
      grad[mean0 + c] += dmu - mu / (P.level2_mean_sd * P.level2_mean_sd);
      grad[sd0 + c] += excess * (dtau - P.level2_rate) + 1.0;
    }
  }
  return lp;
}

double Model::sigma_rho_prior(std::span<const double> x, double* grad, int k) const {
  const ParameterLayout& L = *layout_;
  const PriorConfig& P = spec_.priors;
  const double zs = x[L.sigma1(k)];
  const double zr = x[L.rho(k)];
  const double s1 = std::exp(zs);
  const double r = std::tanh(zr);
  const double log1m_r2 = log1m_tanh_sq(zr);
  // IG on sigma1 plus Jacobian zs; LKJ on rho plus Jacobian log(1 - rho^2).
  double lp = -(P.ig_shape + 1.0) * zs - P.ig_scale / s1 + zs;
  lp += (P.lkj_eta - 1.0) * log1m_r2 + log1m_r2;
  if (grad != nullptr) {
    grad[L.sigma1(k)] += -(P.ig_shape + 1.0) + P.ig_scale / s1 + 1.0;
    grad[L.rho(k)] += -2.0 * r * (P.lkj_eta - 1.0) - 2.0 * r;
  }
  return lp;
}

double Model::abba_prior(std::span<const double> x, double* grad) const {
  const ParameterLayout& L = *layout_;
  const PriorConfig& P = spec_.priors;
  double lp = 0.0;
  if (spec_.kind == ModelKind::AbbaHierarchical) {
    lp += hierarchy_prior(x, grad, P.level2_lower_abba);
    lp += sigma_rho_prior(x, grad, 0);
    return lp;
  }
  const double bg = 1.0 / (P.beta_gamma_sd * P.beta_gamma_sd);
  const double th = 1.0 / (P.theta_sd * P.theta_sd);
  for (int k = 0; k < L.subtrials(); ++k) {
    const std::size_t off = L.regression(k);
    for (std::size_t c = 0; c < 6; ++c) {
      const double prec = c < 4 ? bg : th;
      lp += -0.5 * prec * x[off + c] * x[off + c];
      if (grad != nullptr) grad[off + c] -= prec * x[off + c];
    }
    lp += sigma_rho_prior(x, grad, k);
  }
  return lp;
}

double Model::bin_prior(std::span<const double> x, double* grad) const {
  const ParameterLayout& L = *layout_;
  const PriorConfig& P = spec_.priors;
  if (spec_.kind == ModelKind::BinHierarchical) return hierarchy_prior(x, grad, P.level2_lower_bin);
  const double prec = 1.0 / (P.beta_gamma_sd * P.beta_gamma_sd);
  double lp = 0.0;
  for (int k = 0; k < L.subtrials(); ++k) {
    const std::size_t off = L.regression(k);
    for (std::size_t c = 0; c < 3; ++c) {
      lp += -0.5 * prec * x[off + c] * x[off + c];
      if (grad != nullptr) grad[off + c] -= prec * x[off + c];
    }
  }
  return lp;
}

std::vector<double> Model::latent_values(std::span<const double> x) const {
  const ParameterLayout& L = *layout_;
  std::vector<double> out(data_.size(), std::numeric_limits<double>::quiet_NaN());
  if (!L.has_latent()) return out;
  for (std::size_t i = 0; i < data_.size(); ++i) {
    const int k = data_[i].subtrial;
    const double s1 = std::exp(x[L.sigma1(k)]);
    const double r = std::tanh(x[L.rho(k)]);
    const double s = std::sqrt(1.0 - r * r);
    const auto mu = linear_predictors(x, i);
    const double m = mu.mu2 + r * (data_[i].y_continuous - mu.mu1) / s1;
    // Invert within the retained tail so the probability never rounds to 0 or 1 on the wrong side.
    double z;
    if (signs_[i] == 1) {
      const double above_zero = numkit::std_normal_cdf(m / s);
      z = -numkit::std_normal_inv_cdf(std::max(numkit::inv_logit(-x[L.latent(i)]) * above_zero, 1e-300));
    } else {
      const double below_zero = numkit::std_normal_cdf(-m / s);
      z = numkit::std_normal_inv_cdf(std::max(numkit::inv_logit(x[L.latent(i)]) * below_zero, 1e-300));
    }
    out[i] = m + s * z;
  }
  return out;
}

Model Model::subtrial_model(int k) const {
  ModelSpec sub = spec_;
  sub.subtrials = 1;
  return Model(sub, data_.subset(k));
}

double abba_log_posterior(const ModelSpec& spec, const Dataset& data, const ParameterVector& params) {
  if (!is_abba(spec.kind)) throw ValidationError("abba_log_posterior called with a BIN model kind");
  return Model(spec, data).log_density(params.unconstrained());
}

double bin_log_posterior(const ModelSpec& spec, const Dataset& data, const ParameterVector& params) {
  if (is_abba(spec.kind)) throw ValidationError("bin_log_posterior called with an ABBA model kind");
  return Model(spec, data).log_density(params.unconstrained());
}

std::vector<double> gradient(const ModelSpec& spec, const Dataset& data, const ParameterVector& params) {
  const Model model(spec, data);
  std::vector<double> g(model.dimension());
  model.log_density_gradient(params.unconstrained(), g);
  return g;
}

}  // namespace abba::models

#include "abba/sampler/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "abba/numkit/normal.hpp"

namespace abba::sampler {
namespace {

using Chains = std::vector<std::vector<double>>;

Chains split(const Chains& chains) {
  Chains out;
  for (const auto& c : chains) {
    const std::size_t half = c.size() / 2;
    out.emplace_back(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(half));
    out.emplace_back(c.end() - static_cast<std::ptrdiff_t>(half), c.end());
  }
  return out;
}

// Replaces every value by the normal score of its pooled fractional rank (ties averaged).
Chains rank_normalize(const Chains& chains) {
  std::vector<double> flat;
  for (const auto& c : chains) flat.insert(flat.end(), c.begin(), c.end());
  std::vector<std::size_t> order(flat.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return flat[a] < flat[b]; });

  const double S = static_cast<double>(flat.size());
  std::vector<double> z(flat.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && flat[order[j + 1]] == flat[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    const double score = numkit::std_normal_inv_cdf((rank - 0.375) / (S + 0.25));
    for (std::size_t k = i; k <= j; ++k) z[order[k]] = score;
    i = j + 1;
  }

  Chains out;
  std::size_t pos = 0;
  for (const auto& c : chains) {
    out.emplace_back(z.begin() + static_cast<std::ptrdiff_t>(pos),
                     z.begin() + static_cast<std::ptrdiff_t>(pos + c.size()));
    pos += c.size();
  }
  return out;
}

double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_variance(const std::vector<double>& v) {
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

double classic_rhat(const Chains& chains) {
  const double n = static_cast<double>(chains.front().size());
  std::vector<double> means, vars;
  for (const auto& c : chains) {
    means.push_back(mean(c));
    vars.push_back(sample_variance(c));
  }
  const double W = mean(vars);
  const double B = n * sample_variance(means);
  const double var_plus = (n - 1.0) / n * W + B / n;
  return std::sqrt(var_plus / W);
}

bool all_identical(const Chains& chains) {
  const double first = chains.front().front();
  for (const auto& c : chains) {
    for (double x : c) {
      if (x != first) return false;
    }
  }
  return true;
}

bool usable(const Chains& chains) {
  if (chains.empty() || chains.front().size() < 4) return false;
  for (const auto& c : chains) {
    if (c.size() != chains.front().size()) return false;
    for (double x : c) {
      if (!std::isfinite(x)) return false;
    }
  }
  return true;
}

double median(std::vector<double> v) {
  const std::size_t n = v.size();
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(n / 2), v.end());
  const double hi = v[n / 2];
  if (n % 2 == 1) return hi;
  return 0.5 * (hi + *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(n / 2)));
}

// Biased autocovariance of one chain at the given lag.
double autocovariance(const std::vector<double>& x, double m, std::size_t lag) {
  double s = 0.0;
  for (std::size_t i = 0; i + lag < x.size(); ++i) s += (x[i] - m) * (x[i + lag] - m);
  return s / static_cast<double>(x.size());
}

double geyer_ess(const Chains& chains) {
  const std::size_t m = chains.size();
  const std::size_t n = chains.front().size();
  std::vector<double> chain_mean(m), chain_var(m);
  for (std::size_t c = 0; c < m; ++c) {
    chain_mean[c] = mean(chains[c]);
    chain_var[c] = autocovariance(chains[c], chain_mean[c], 0) * static_cast<double>(n) /
                   (static_cast<double>(n) - 1.0);
  }
  const double mean_var = mean(chain_var);
  double var_plus = mean_var * (static_cast<double>(n) - 1.0) / static_cast<double>(n);
  if (m > 1) var_plus += sample_variance(chain_mean);

  const auto mean_acov = [&](std::size_t lag) {
    double s = 0.0;
    for (std::size_t c = 0; c < m; ++c) s += autocovariance(chains[c], chain_mean[c], lag);
    return s / static_cast<double>(m);
  };

  std::vector<double> rho_hat(n + 2, 0.0);
  double rho_even = 1.0;
  rho_hat[0] = rho_even;
  double rho_odd = 1.0 - (mean_var - mean_acov(1)) / var_plus;
  rho_hat[1] = rho_odd;

  std::size_t s = 1;
  while (s < n - 4 && rho_even + rho_odd > 0.0) {
    rho_even = 1.0 - (mean_var - mean_acov(s + 1)) / var_plus;
    rho_odd = 1.0 - (mean_var - mean_acov(s + 2)) / var_plus;
    if (rho_even + rho_odd >= 0.0) {
      rho_hat[s + 1] = rho_even;
      rho_hat[s + 2] = rho_odd;
    }
    s += 2;
  }
  const std::size_t max_s = s;
  if (rho_even > 0.0) rho_hat[max_s + 1] = rho_even;

  // Initial monotone sequence.
  for (std::size_t t = 1; t + 3 <= max_s; t += 2) {
    if (rho_hat[t + 1] + rho_hat[t + 2] > rho_hat[t - 1] + rho_hat[t]) {
      rho_hat[t + 1] = 0.5 * (rho_hat[t - 1] + rho_hat[t]);
      rho_hat[t + 2] = rho_hat[t + 1];
    }
  }

  const double total = static_cast<double>(m * n);
  double tau = -1.0 + rho_hat[max_s + 1];
  for (std::size_t t = 0; t < max_s; ++t) tau += 2.0 * rho_hat[t];
  tau = std::max(tau, 1.0 / std::log10(total));
  return total / tau;
}

}  // namespace

double split_rhat(const Chains& chains) {
  if (!usable(chains)) return std::numeric_limits<double>::quiet_NaN();
  if (all_identical(chains)) return 1.0;
  const Chains halves = split(chains);
  for (const auto& h : halves) {
    if (std::all_of(h.begin(), h.end(), [&](double x) { return x == h.front(); })) {
      return std::numeric_limits<double>::infinity();
    }
  }
  const double bulk = classic_rhat(rank_normalize(halves));

  std::vector<double> pooled;
  for (const auto& h : halves) pooled.insert(pooled.end(), h.begin(), h.end());
  const double med = median(pooled);
  Chains folded = halves;
  for (auto& h : folded) {
    for (double& x : h) x = std::abs(x - med);
  }
  const double tail = classic_rhat(rank_normalize(folded));
  return std::max(bulk, tail);
}

double ess_bulk(const Chains& chains) {
  if (!usable(chains)) return std::numeric_limits<double>::quiet_NaN();
  const double total = static_cast<double>(chains.size() * chains.front().size());
  if (all_identical(chains)) return total;
  const Chains z = rank_normalize(split(chains));
  for (const auto& h : z) {
    if (std::all_of(h.begin(), h.end(), [&](double x) { return x == h.front(); })) {
      return std::numeric_limits<double>::quiet_NaN();
    }
  }
  return std::min(geyer_ess(z), total);
}

Diagnostics diagnostics(const PosteriorDraws& draws, int max_tree_depth) {
  Diagnostics d;
  d.rhat.resize(draws.dimension);
  d.ess_bulk.resize(draws.dimension);
  for (std::size_t p = 0; p < draws.dimension; ++p) {
    Chains chains;
    for (std::size_t c = 0; c < draws.chains.size(); ++c) chains.push_back(draws.column(p, c));
    d.rhat[p] = split_rhat(chains);
    d.ess_bulk[p] = ess_bulk(chains);
  }
  d.divergences = draws.divergences();
  d.max_depth_hits = draws.max_depth_hits(max_tree_depth);
  return d;
}

}  // namespace abba::sampler

#include "oracles.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <memory>
#include <numbers>
#include <numeric>
#include <sstream>

#include "abba/models/layout.hpp"
#include "abba/models/model.hpp"
#include "abba/numkit/hdi.hpp"
#include "abba/numkit/orthant.hpp"
#include "abba/posterior/lor.hpp"
#include "abba/sampler/diagnostics.hpp"
#include "abba/sampler/nuts.hpp"
#include "abba/simlab/calibrate.hpp"
#include "abba/simlab/replicates.hpp"

namespace abba::testing {
namespace {

constexpr double kPi = 3.14159265358979323846;

double normal_pdf(double x, double mu, double sd) {
  const double z = (x - mu) / sd;
  return std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * kPi));
}

// Phi through erfc only, never through the library's normal functions.
double phi_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

std::string fmt(const char* label, double v) {
  std::ostringstream os;
  os.precision(3);
  os << label << v;
  return os.str();
}

}  // namespace

Quadrature gauss_legendre(int n, double a, double b) {
  Quadrature q;
  q.x.resize(static_cast<std::size_t>(n));
  q.w.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const auto j = static_cast<std::size_t>(i);
    q.x[j] = 0.5 * (a + b) + 0.5 * (b - a) * x;
    q.w[j] = (b - a) / ((1.0 - x * x) * dp * dp);
  }
  return q;
}

double grid_orthant(double mu1, double mu2, double s1, double r, double a, double b, int cells) {
  const double lo1 = std::max(a, mu1 - 8.0 * s1), hi1 = mu1 + 8.0 * s1;
  const double lo2 = std::max(b, mu2 - 8.0), hi2 = mu2 + 8.0;
  if (lo1 >= hi1 || lo2 >= hi2) return 0.0;
  const double h1 = (hi1 - lo1) / cells, h2 = (hi2 - lo2) / cells;
  const double det = 1.0 - r * r;
  const double norm = 1.0 / (2.0 * kPi * s1 * std::sqrt(det));
  double total = 0.0;
  for (int i = 0; i < cells; ++i) {
    const double z1 = (lo1 + (i + 0.5) * h1 - mu1) / s1;
    double row = 0.0;
    for (int j = 0; j < cells; ++j) {
      const double z2 = lo2 + (j + 0.5) * h2 - mu2;
      row += std::exp(-(z1 * z1 - 2.0 * r * z1 * z2 + z2 * z2) / (2.0 * det));
    }
    total += row;
  }
  return total * norm * h1 * h2;
}

double quadrature_cdf(double z) {
  // 0.5 +- integral of the density between 0 and |z|, in unit panels.
  const double m = std::min(std::abs(z), 40.0);
  const int panels = std::max(1, static_cast<int>(std::ceil(m)));
  double area = 0.0;
  for (int p = 0; p < panels; ++p) {
    const auto q = gauss_legendre(40, m * p / panels, m * (p + 1) / panels);
    for (std::size_t i = 0; i < q.x.size(); ++i) area += q.w[i] * normal_pdf(q.x[i], 0.0, 1.0);
  }
  return z >= 0 ? 0.5 + area : 0.5 - area;
}

std::vector<models::SubjectRecord> random_records(numkit::Rng& rng, int K, int n_per_arm) {
  std::vector<models::SubjectRecord> out;
  for (int k = 0; k < K; ++k) {
    for (int i = 0; i < 2 * n_per_arm; ++i) {
      models::SubjectRecord s;
      s.subtrial = k;
      s.treatment = i % 2;
      s.baseline = std::exp(rng.normal());
      s.y_continuous = 3.0 + 0.6 * rng.normal();
      s.y_binary = rng.uniform() < 0.35 ? 1 : 0;
      out.push_back(s);
    }
  }
  return out;
}

std::vector<double> random_point(numkit::Rng& rng, std::size_t dimension, double radius) {
  std::vector<double> x(dimension);
  for (auto& v : x) v = rng.uniform(-radius, radius);
  return x;
}

Check check_orthant_grid() {
  struct Case {
    double mu1, mu2, s1, r, a, b;
  };
  const Case cases[] = {
      {0.0, 0.0, 1.0, 0.3, 0.0, 0.0},        {0.0, 0.0, 1.0, 0.0, 0.0, 0.0},
      {3.0, 0.4, 0.5, 0.3, std::log(20.0), 0.0}, {2.5, -0.3, 0.8, -0.7, std::log(20.0), 0.0},
      {0.2, 1.1, 1.3, 0.9, -0.5, 0.7},       {-1.0, 0.5, 0.4, -0.95, -1.2, 1.5},
  };
  Check c;
  double worst = 0.0;
  for (const auto& k : cases) {
    const double ref = grid_orthant(k.mu1, k.mu2, k.s1, k.r, k.a, k.b);
    const numkit::Cov2 cov(k.s1, numkit::Correlation2(k.r));
    const double got = numkit::bvn_upper_orthant(k.mu1, k.mu2, cov, k.a, k.b);
    worst = std::max(worst, std::abs(got - ref));
  }
  c.pass = worst < 1e-5;
  c.detail = fmt("max |orthant - grid| = ", worst) + " over 6 cases (tol 1e-5)";
  return c;
}

Check check_gradients() {
  using models::ModelKind;
  numkit::Rng rng(11, {0x6AD});
  double worst = 0.0;
  int points = 0;
  for (auto kind : {ModelKind::AbbaHierarchical, ModelKind::AbbaStratified, ModelKind::BinHierarchical,
                    ModelKind::BinStratified}) {
    std::vector<models::SubjectRecord> records;
    for (int p = 0; p < 100; ++p) {
      // A fresh small dataset every 10 points.
      if (p % 10 == 0) records = random_records(rng, 3, 4);
      const models::Model model(models::ModelSpec{kind, 3, {}, {}}, models::Dataset(records, 3));
      auto x = random_point(rng, model.dimension());
      std::vector<double> g(x.size());
      model.log_density_gradient(x, g);
      for (std::size_t i = 0; i < x.size(); ++i) {
        const double h = 1e-5;
        auto xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        const double fd = (model.log_density(xp) - model.log_density(xm)) / (2.0 * h);
        worst = std::max(worst, std::abs(g[i] - fd) / std::max(1.0, std::abs(fd)));
      }
      ++points;
    }
  }
  Check c;
  c.pass = worst < 1e-4;
  c.detail = fmt("max relative gradient error = ", worst) + " at " + std::to_string(points) +
             " points over 4 model kinds (tol 1e-4)";
  return c;
}

Check check_rho_zero_factorization() {
  numkit::Rng rng(12, {0xFAC});
  double worst = 0.0;
  const models::ResponderRule rule{};
  for (int rep = 0; rep < 50; ++rep) {
    const int K = 1 + rep % 3;
    const auto records = random_records(rng, K, 5);
    const models::Model model(models::ModelSpec{models::ModelKind::AbbaHierarchical, K, {}, rule},
                              models::Dataset(records, K));
    const auto& L = *model.layout();
    auto x = random_point(rng, model.dimension());
    x[L.rho(0)] = 0.0;
    const double sigma1 = std::exp(x[L.sigma1(0)]);
    double ref = 0.0;
    for (std::size_t i = 0; i < records.size(); ++i) {
      const auto& s = records[i];
      const std::size_t r = L.regression(s.subtrial);
      const double lx = std::log(s.baseline);
      const double mu1 = x[r] + x[r + 2] * lx + x[r + 4] * s.treatment;
      const double mu2 = x[r + 1] + x[r + 3] * lx + x[r + 5] * s.treatment;
      const double u = 1.0 / (1.0 + std::exp(-x[L.latent(i)]));
      // Latent positive exactly when no failure event was recorded.
      const double sign = s.y_binary == 0 ? 1.0 : -1.0;
      ref += std::log(normal_pdf(s.y_continuous, mu1, sigma1)) + std::log(phi_cdf(sign * mu2)) +
             std::log(u) + std::log1p(-u);
    }
    const double lik = model.log_likelihood(x);
    const double joint = model.log_density(x) - model.log_prior(x);
    worst = std::max({worst, std::abs(lik - ref) / std::max(1.0, std::abs(ref)),
                      std::abs(joint - ref) / std::max(1.0, std::abs(ref))});
  }
  Check c;
  c.pass = worst < 1e-8;
  c.detail = fmt("max deviation from normal x probit likelihood = ", worst) + " on 50 datasets (tol 1e-8)";
  return c;
}

Check check_latent_marginalization() {
  // Two subjects, one per arm, opposite latent signs; integrate both u coordinates on a
  // 200 x 200 Gauss-Legendre grid and compare with the joint density of the continuous outcome
  // and the observed latent sign, itself a 1-D quadrature of the bivariate density.
  std::vector<models::SubjectRecord> records{{0, 0, 1.7, 3.2, 0}, {0, 1, 0.6, 2.6, 1}};
  const models::Model model(models::ModelSpec{models::ModelKind::AbbaHierarchical, 1, {}, {}},
                            models::Dataset(records, 1));
  const auto& L = *model.layout();
  numkit::Rng rng(13, {0x3A6});
  auto x = random_point(rng, model.dimension(), 0.8);
  const double sigma1 = 0.7, rho = 0.6;
  x[L.sigma1(0)] = std::log(sigma1);
  x[L.rho(0)] = std::atanh(rho);

  double exact = 1.0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& s = records[i];
    const std::size_t r = L.regression(0);
    const double lx = std::log(s.baseline);
    const double mu1 = x[r] + x[r + 2] * lx + x[r + 4] * s.treatment;
    const double mu2 = x[r + 1] + x[r + 3] * lx + x[r + 5] * s.treatment;
    const double y = s.y_continuous, det = sigma1 * sigma1 * (1.0 - rho * rho);
    const auto bvn = [&](double y2) {
      const double d1 = y - mu1, d2 = y2 - mu2;
      const double q = (d1 * d1 - 2.0 * rho * sigma1 * d1 * d2 + sigma1 * sigma1 * d2 * d2) / det;
      return std::exp(-0.5 * q) / (2.0 * std::numbers::pi * std::sqrt(det));
    };
    // The sign's half-line, truncated 12 conditional sds past the conditional mean.
    const double centre = mu2 + rho * (y - mu1) / sigma1;
    const double lo = s.y_binary == 0 ? 0.0 : std::min(0.0, centre) - 12.0;
    const double hi = s.y_binary == 0 ? std::max(0.0, centre) + 12.0 : 0.0;
    const auto g = gauss_legendre(400, lo, hi);
    double joint = 0.0;
    for (std::size_t j = 0; j < g.x.size(); ++j) joint += g.w[j] * bvn(g.x[j]);
    exact *= joint;
  }

  const auto q = gauss_legendre(200, 0.0, 1.0);
  double integral = 0.0;
  for (std::size_t a = 0; a < q.x.size(); ++a) {
    for (std::size_t b = 0; b < q.x.size(); ++b) {
      const double u1 = q.x[a], u2 = q.x[b];
      x[L.latent(0)] = std::log(u1 / (1.0 - u1));
      x[L.latent(1)] = std::log(u2 / (1.0 - u2));
      // The likelihood carries the logit Jacobian; remove it to integrate in u itself.
      const double lik = model.log_likelihood(x) - std::log(u1 * (1.0 - u1)) - std::log(u2 * (1.0 - u2));
      integral += q.w[a] * q.w[b] * std::exp(lik);
    }
  }
  Check c;
  const double rel = std::abs(integral - exact) / exact;
  c.pass = rel < 1e-6;
  c.detail = fmt("relative error of integrated latent likelihood = ", rel) + " (tol 1e-6)";
  return c;
}

Check check_conjugate_recovery() {
  // y_i ~ N(mu, 1), mu ~ N(0, 10^2).
  numkit::Rng rng(14, {0xC0});
  std::vector<double> y(20);
  for (auto& v : y) v = 1.3 + rng.normal();
  const double n = static_cast<double>(y.size());
  const double sum = std::accumulate(y.begin(), y.end(), 0.0);
  const double post_prec = n + 1.0 / 100.0;
  const double post_mean = sum / post_prec, post_sd = 1.0 / std::sqrt(post_prec);

  sampler::Target target{1, [&](std::span<const double> q, std::span<double> g) {
                            double lp = -q[0] * q[0] / 200.0;
                            g[0] = -q[0] / 100.0;
                            for (double v : y) {
                              lp -= 0.5 * (v - q[0]) * (v - q[0]);
                              g[0] += v - q[0];
                            }
                            return lp;
                          }};
  sampler::SamplerConfig cfg;
  cfg.chains = 2;
  cfg.warmup_iters = 1000;
  cfg.sampling_iters = 2000;
  cfg.seed = 99;
  const auto draws = sampler::run(target, cfg);
  std::vector<std::vector<double>> chains{draws.column(0, 0), draws.column(0, 1)};
  std::vector<double> all;
  for (const auto& ch : chains) all.insert(all.end(), ch.begin(), ch.end());
  const double m = std::accumulate(all.begin(), all.end(), 0.0) / static_cast<double>(all.size());
  double ss = 0.0;
  for (double v : all) ss += (v - m) * (v - m);
  const double var = ss / static_cast<double>(all.size() - 1);
  const double sd = std::sqrt(var);

  const double ess = sampler::ess_bulk(chains);
  const double mcse_mean = sd / std::sqrt(ess);
  // The SD's standard error from the squared deviations' own effective size.
  std::vector<std::vector<double>> sq(2);
  double sq_mean = 0.0, sq_m2 = 0.0;
  for (std::size_t c = 0; c < 2; ++c) {
    for (double v : chains[c]) sq[c].push_back((v - m) * (v - m));
  }
  for (const auto& ch : sq) {
    for (double v : ch) sq_mean += v;
  }
  sq_mean /= static_cast<double>(all.size());
  for (const auto& ch : sq) {
    for (double v : ch) sq_m2 += (v - sq_mean) * (v - sq_mean);
  }
  const double sq_sd = std::sqrt(sq_m2 / static_cast<double>(all.size() - 1));
  const double mcse_var = sq_sd / std::sqrt(sampler::ess_bulk(sq));
  const double mcse_sd = mcse_var / (2.0 * sd);

  Check c;
  const double zm = std::abs(m - post_mean) / mcse_mean, zs = std::abs(sd - post_sd) / mcse_sd;
  c.pass = zm <= 3.0 && zs <= 3.0;
  c.detail = fmt("posterior mean off by ", zm) + fmt(" MC-SE, SD off by ", zs) + " MC-SE (limit 3)";
  return c;
}

Check check_hdi_quantile_oracle() {
  numkit::Rng rng(15, {0x4D1});
  std::vector<double> z(100000);
  for (auto& v : z) v = rng.normal();
  const auto h = numkit::hdi(z, 0.95);
  const double err = std::max(std::abs(h.low + 1.959964), std::abs(h.high - 1.959964));

  // Skewed draws: HDI must be narrower than the equal-tailed interval.
  std::vector<double> skew(z.size());
  std::transform(z.begin(), z.end(), skew.begin(), [](double v) { return std::exp(v); });
  const bool narrower = numkit::hdi(skew, 0.95).width() < numkit::equal_tailed_interval(skew, 0.95).width();

  // Brute-force minimal window with leftmost tie-break on small random sets.
  bool brute_ok = true;
  for (int rep = 0; rep < 50 && brute_ok; ++rep) {
    std::vector<double> s(37 + rep);
    for (auto& v : s) v = std::round(rng.normal() * 8.0) / 8.0;  // ties on purpose
    std::vector<double> sorted = s;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    const auto m = static_cast<std::size_t>(std::ceil(0.8 * static_cast<double>(n)));
    double best_w = 1e300, best_lo = 0, best_hi = 0;
    for (std::size_t i = 0; i + m <= n; ++i) {
      const double w = sorted[i + m - 1] - sorted[i];
      if (w < best_w) {
        best_w = w;
        best_lo = sorted[i];
        best_hi = sorted[i + m - 1];
      }
    }
    const auto got = numkit::hdi(s, 0.8);
    brute_ok = got.low == best_lo && got.high == best_hi;
  }
  Check c;
  c.pass = err < 0.05 && narrower && brute_ok;
  c.detail = fmt("normal HDI vs quantiles off by ", err) + (narrower ? ", skewed HDI narrower" : ", skewed HDI NOT narrower") +
             (brute_ok ? ", brute-force windows agree" : ", brute-force window mismatch");
  return c;
}

Check check_lor_antisymmetry() {
  using models::ModelKind;
  numkit::Rng rng(16, {0xA5});
  std::size_t compared = 0, mismatched = 0;
  for (auto kind : {ModelKind::AbbaHierarchical, ModelKind::AbbaStratified, ModelKind::BinHierarchical,
                    ModelKind::BinStratified}) {
    const int K = 3;
    const auto records = random_records(rng, K, 6);
    auto swapped = records;
    for (auto& s : swapped) s.treatment = 1 - s.treatment;
    const models::ModelSpec spec{kind, K, {}, {}};
    const models::Dataset data(records, K), data_swapped(swapped, K);
    const models::ParameterLayout layout(spec, data), layout_swapped(spec, data_swapped);

    sampler::PosteriorDraws d;
    d.dimension = layout.dimension();
    d.iterations = 40;
    d.chains.resize(1);
    auto d_swapped = d;
    const std::size_t w = layout.block_width();
    const std::size_t theta_off = w == 6 ? 4 : 2;
    const std::size_t n_beta = w == 6 ? 2 : 1;
    for (std::size_t it = 0; it < d.iterations; ++it) {
      auto x = random_point(rng, d.dimension);
      // Dyadic intercepts and effects so beta + theta is exact.
      for (int k = 0; k < K; ++k) {
        const std::size_t r = layout.regression(k);
        for (std::size_t j = 0; j < n_beta; ++j) {
          x[r + j] = std::round(rng.uniform(-2, 2) * 16.0) / 16.0;
          x[r + theta_off + j] = std::round(rng.uniform(-2, 2) * 16.0) / 16.0;
        }
      }
      auto xs = x;
      for (int k = 0; k < K; ++k) {
        const std::size_t r = layout.regression(k);
        for (std::size_t j = 0; j < n_beta; ++j) {
          xs[r + j] = x[r + j] + x[r + theta_off + j];
          xs[r + theta_off + j] = -x[r + theta_off + j];
        }
      }
      d.chains[0].draws.insert(d.chains[0].draws.end(), x.begin(), x.end());
      d_swapped.chains[0].draws.insert(d_swapped.chains[0].draws.end(), xs.begin(), xs.end());
    }
    const auto a = posterior::log_odds_ratio_draws(d, layout, data, spec);
    const auto b = posterior::log_odds_ratio_draws(d_swapped, layout_swapped, data_swapped, spec);
    for (int k = 0; k < K; ++k) {
      for (std::size_t i = 0; i < a.lambda[k].size(); ++i) {
        ++compared;
        // Exact equality; +0 and -0 both arise when the two arm rates coincide.
        if (!(a.lambda[k][i] == -b.lambda[k][i])) ++mismatched;
      }
    }
  }
  Check c;
  c.pass = mismatched == 0 && compared > 0;
  c.detail = std::to_string(mismatched) + " of " + std::to_string(compared) +
             " relabelled log odds ratio draws differ from exact negation";
  return c;
}

namespace {

bool same_bits(double a, double b) { return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b); }

bool same_rows(const simlab::ReplicateRow& a, const simlab::ReplicateRow& b) {
  return a.replicate == b.replicate && a.subtrial == b.subtrial && a.model == b.model &&
         same_bits(a.lor_mean, b.lor_mean) && same_bits(a.hdi.low, b.hdi.low) && same_bits(a.hdi.high, b.hdi.high) &&
         a.success == b.success && same_bits(a.lor_variance, b.lor_variance) && same_bits(a.true_lor, b.true_lor) &&
         same_bits(a.rhat_max, b.rhat_max) && a.divergences == b.divergences && a.clamps == b.clamps &&
         a.flagged == b.flagged;
}

}  // namespace

Check check_worker_determinism() {
  const auto scenario = simlab::ensure_calibrated(*simlab::find_scenario("scenario1"), {});
  simlab::ReplicateOptions opt;
  opt.models = {models::ModelSpec{models::ModelKind::AbbaHierarchical},
                models::ModelSpec{models::ModelKind::BinHierarchical}};
  opt.replicates = 4;
  opt.sampler = *sampler::preset("smoke");
  opt.sampler.seed = 2024;
  opt.workers = 1;
  const auto one = simlab::run_replicates(scenario, opt);
  opt.workers = 3;
  const auto three = simlab::run_replicates(scenario, opt);
  bool same = one.rows.size() == three.rows.size() && !one.rows.empty();
  for (std::size_t i = 0; same && i < one.rows.size(); ++i) same = same_rows(one.rows[i], three.rows[i]);
  for (std::size_t i = 0; same && i < one.metrics.size(); ++i) {
    same = same_bits(one.metrics[i].width.value, three.metrics[i].width.value) &&
           same_bits(one.metrics[i].bias.value, three.metrics[i].bias.value);
  }
  Check c;
  c.pass = same;
  c.detail = std::to_string(one.rows.size()) + " replicate rows " +
             (same ? "bit-identical with 1 and 3 workers" : "DIFFER between 1 and 3 workers");
  return c;
}

}  // namespace abba::testing

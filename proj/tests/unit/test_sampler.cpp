#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "abba/errors.hpp"
#include "abba/numkit/random.hpp"
#include "abba/sampler/adaptation.hpp"
#include "abba/sampler/config.hpp"
#include "abba/sampler/diagnostics.hpp"
#include "abba/sampler/hamiltonian.hpp"
#include "abba/sampler/nuts.hpp"
#include "oracles.hpp"

using namespace abba;
using namespace abba::sampler;

namespace {

Target std_normal(std::size_t d) {
  return {d, [](std::span<const double> q, std::span<double> g) {
            double lp = 0.0;
            for (std::size_t i = 0; i < q.size(); ++i) {
              lp -= 0.5 * q[i] * q[i];
              g[i] = -q[i];
            }
            return lp;
          }};
}

SamplerConfig config(int warmup, int iter, std::uint64_t seed) {
  SamplerConfig c;
  c.chains = 2;
  c.warmup_iters = warmup;
  c.sampling_iters = iter;
  c.seed = seed;
  return c;
}

std::vector<double> pooled(const PosteriorDraws& d, std::size_t p) {
  std::vector<double> out;
  for (std::size_t c = 0; c < d.chains.size(); ++c) {
    const auto col = d.column(p, c);
    out.insert(out.end(), col.begin(), col.end());
  }
  return out;
}

double mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()); }

double sd(const std::vector<double>& v) {
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace

TEST(Config, ValidationAndPresets) {
  SamplerConfig c;
  EXPECT_NO_THROW(c.validate());
  c.chains = 0;
  EXPECT_THROW(c.validate(), ValidationError);
  c = {};
  c.target_accept = 1.0;
  EXPECT_THROW(c.validate(), ValidationError);
  c = {};
  c.sampling_iters = 0;
  EXPECT_THROW(c.validate(), ValidationError);
  const auto desk = preset("desk");
  ASSERT_TRUE(desk);
  EXPECT_EQ(desk->chains, 2);
  EXPECT_EQ(desk->warmup_iters, 500);
  EXPECT_EQ(desk->sampling_iters, 1000);
  EXPECT_EQ(preset("paper")->sampling_iters, 10000);
  EXPECT_FALSE(preset("nope"));
}

TEST(Adaptation, WindowScheduleForThousandIterations) {
  const WindowedVarianceAdaptation w(3, 1000);
  EXPECT_EQ(w.init_buffer(), 150);
  EXPECT_EQ(w.term_buffer(), 100);
  // Windows of 25, 50, 100; a 200-wide window would leave less than twice its width before the
  // terminal buffer, so the last one stretches to it.
  EXPECT_EQ(w.window_ends(), (std::vector<int>{174, 224, 324, 899}));
}

TEST(Adaptation, VarianceEstimateIsRegularized) {
  WindowedVarianceAdaptation w(1, 1000);
  std::vector<double> inv{1.0};
  numkit::Rng rng(1, {1});
  int updates = 0;
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> q{3.0 * rng.normal()};
    if (w.learn(q, inv)) ++updates;
  }
  EXPECT_EQ(updates, 4);
  EXPECT_NEAR(inv[0], 9.0, 1.5);
}

TEST(Adaptation, DualAveragingMovesStepSizeTowardTarget) {
  StepSizeAdaptation up(0.8), down(0.8);
  up.set_mu(std::log(10.0 * 0.1));
  down.set_mu(std::log(10.0 * 0.1));
  up.restart();
  down.restart();
  double e_up = 0, e_down = 0;
  for (int i = 0; i < 50; ++i) {
    e_up = up.learn(1.0);
    e_down = down.learn(0.2);
  }
  EXPECT_GT(e_up, e_down);
  EXPECT_GT(up.complete(), down.complete());
}

TEST(Hamiltonian, LeapfrogConservesEnergyForTinySteps) {
  const Target t{2, [](std::span<const double> q, std::span<double> g) {
                   g[0] = -q[0] / 4.0;
                   g[1] = -q[1] * 9.0;
                   return -q[0] * q[0] / 8.0 - 4.5 * q[1] * q[1];
                 }};
  const std::vector<double> inv{1.0, 1.0};
  const DiagHamiltonian h(t, inv);
  PhasePoint z(2);
  z.q = {1.0, -0.5};
  z.p = {0.3, 1.2};
  h.update(z);
  const double e0 = h.energy(z);
  double worst = 0.0;
  for (int i = 0; i < 2000; ++i) {
    h.leapfrog(z, 1e-4);
    worst = std::max(worst, std::abs(h.energy(z) - e0));
  }
  EXPECT_LT(worst, 1e-6);
}

TEST(Initialize, DeterministicAndInsideRanges) {
  InitStrategy s;
  s.ranges.push_back({3, 6, -2.9444, 2.9444});
  numkit::Rng a(7, {1}), b(7, {1});
  for (int rep = 0; rep < 100; ++rep) {
    const auto x = initialize(8, s, a);
    EXPECT_EQ(x, initialize(8, s, b));
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (i >= 3 && i < 6) {
        EXPECT_GE(x[i], -2.9444);
        EXPECT_LE(x[i], 2.9444);
        // Back-transformed latent values lie in (0.05, 0.95).
        const double u = 1 / (1 + std::exp(-x[i]));
        EXPECT_GT(u, 0.049);
        EXPECT_LT(u, 0.951);
      } else {
        EXPECT_GE(x[i], -2.0);
        EXPECT_LE(x[i], 2.0);
      }
    }
  }
}

TEST(Nuts, StandardNormalTenDimensions) {
  const auto d = run(std_normal(10), config(1000, 2000, 3));
  for (std::size_t p = 0; p < 10; ++p) {
    const auto v = pooled(d, p);
    EXPECT_NEAR(mean(v), 0.0, 0.03) << p;
    EXPECT_NEAR(sd(v), 1.0, 0.05) << p;
  }
  EXPECT_EQ(d.divergences(), 0u);
}

TEST(Nuts, CorrelatedPair) {
  const double r = 0.9;
  const Target t{2, [r](std::span<const double> q, std::span<double> g) {
                   const double k = 1.0 / (1 - r * r);
                   g[0] = -k * (q[0] - r * q[1]);
                   g[1] = -k * (q[1] - r * q[0]);
                   return -0.5 * k * (q[0] * q[0] - 2 * r * q[0] * q[1] + q[1] * q[1]);
                 }};
  const auto d = run(t, config(1000, 2000, 4));
  const auto a = pooled(d, 0), b = pooled(d, 1);
  const double ma = mean(a), mb = mean(b);
  double sab = 0;
  for (std::size_t i = 0; i < a.size(); ++i) sab += (a[i] - ma) * (b[i] - mb);
  const double corr = sab / static_cast<double>(a.size() - 1) / (sd(a) * sd(b));
  EXPECT_NEAR(corr, 0.9, 0.03);
  EXPECT_EQ(d.divergences(), 0u);
}

TEST(Nuts, ConjugateNormalMean) {
  const auto c = abba::testing::check_conjugate_recovery();
  EXPECT_TRUE(c.pass) << c.detail;
}

TEST(Nuts, KolmogorovSmirnovOnStandardNormal) {
  auto cfg = config(1000, 5000, 5);
  const auto d = run(std_normal(1), cfg);
  auto v = pooled(d, 0);
  std::sort(v.begin(), v.end());
  const double n = static_cast<double>(v.size());
  double D = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double F = 0.5 * std::erfc(-v[i] / std::sqrt(2.0));
    D = std::max({D, F - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - F});
  }
  // Asymptotic 1% critical value.
  EXPECT_LT(D * std::sqrt(n), 1.628);
}

TEST(Nuts, BitIdenticalReruns) {
  const auto cfg = config(200, 300, 6);
  const auto a = run(std_normal(4), cfg);
  const auto b = run(std_normal(4), cfg);
  RunOptions seq;
  seq.parallel_chains = false;
  const auto c = run(std_normal(4), cfg, {}, seq);
  for (std::size_t ch = 0; ch < 2; ++ch) {
    EXPECT_EQ(a.chains[ch].draws, b.chains[ch].draws);
    EXPECT_EQ(a.chains[ch].draws, c.chains[ch].draws);
    EXPECT_EQ(a.chains[ch].step_size, c.chains[ch].step_size);
  }
  EXPECT_NE(a.chains[0].draws, a.chains[1].draws);
  RunOptions other;
  other.stream = 1;
  EXPECT_NE(run(std_normal(4), cfg, {}, other).chains[0].draws, a.chains[0].draws);
}

TEST(Nuts, RecordsSamplerState) {
  const auto d = run(std_normal(3), config(150, 200, 7));
  ASSERT_EQ(d.chains.size(), 2u);
  EXPECT_EQ(d.iterations, 200u);
  for (const auto& c : d.chains) {
    EXPECT_EQ(c.draws.size(), 600u);
    EXPECT_EQ(c.tree_depth.size(), 200u);
    EXPECT_GT(c.step_size, 0.0);
    EXPECT_EQ(c.inverse_metric.size(), 3u);
    for (double a : c.accept_stat) {
      EXPECT_GE(a, 0.0);
      EXPECT_LE(a, 1.0);
    }
  }
}

TEST(Nuts, InitializationFailureIsReported) {
  const Target bad{2, [](std::span<const double>, std::span<double> g) {
                     g[0] = g[1] = 0.0;
                     return -std::numeric_limits<double>::infinity();
                   }};
  EXPECT_THROW(run(bad, config(10, 10, 8)), InitializationError);
}

TEST(Diagnostics, ConstantIdenticalChainsGiveOne) {
  const std::vector<std::vector<double>> chains(2, std::vector<double>(500, 0.25));
  EXPECT_EQ(split_rhat(chains), 1.0);
}

TEST(Diagnostics, CopiedChainsAreNearOne) {
  numkit::Rng rng(9, {9});
  std::vector<double> c(1000);
  for (auto& v : c) v = rng.normal();
  EXPECT_LT(split_rhat({c, c}), 1.01);
}

TEST(Diagnostics, NonMixingChainsFlagged) {
  numkit::Rng rng(10, {10});
  std::vector<double> a(1000), b(1000);
  for (auto& v : a) v = rng.normal();
  for (auto& v : b) v = 10.0 + rng.normal();
  // Rank normalization bounds R-hat for fully separated chains near 1.8.
  EXPECT_GT(split_rhat({a, b}), 1.5);
}

TEST(Diagnostics, IndependentDrawsHaveFullEffectiveSize) {
  numkit::Rng rng(11, {11});
  std::vector<std::vector<double>> chains(2, std::vector<double>(2000));
  for (auto& c : chains) {
    for (auto& v : c) v = rng.normal();
  }
  EXPECT_NEAR(ess_bulk(chains), 4000.0, 400.0);
  EXPECT_LT(std::abs(split_rhat(chains) - 1.0), 0.01);
}

TEST(Diagnostics, AutoregressiveEffectiveSize) {
  numkit::Rng rng(12, {12});
  const double phi = 0.9;
  std::vector<std::vector<double>> chains(4, std::vector<double>(5000));
  for (auto& c : chains) {
    double x = rng.normal() / std::sqrt(1 - phi * phi);
    for (auto& v : c) {
      x = phi * x + rng.normal();
      v = x;
    }
  }
  const double want = 20000.0 * (1 - phi) / (1 + phi);
  EXPECT_NEAR(ess_bulk(chains), want, 0.2 * want);
}

TEST(Diagnostics, EffectiveSizeCappedAtTotalDraws) {
  std::vector<std::vector<double>> chains(2, std::vector<double>(1000));
  numkit::Rng rng(13, {13});
  for (auto& c : chains) {
    for (std::size_t i = 0; i < c.size(); i += 2) {
      c[i] = rng.normal();
      c[i + 1] = -c[i];
    }
  }
  EXPECT_LE(ess_bulk(chains), 2000.0);
}

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "abba/errors.hpp"
#include "abba/models/model.hpp"
#include "abba/numkit/random.hpp"
#include "abba/posterior/fit.hpp"
#include "oracles.hpp"

using namespace abba;
using namespace abba::models;
using abba::testing::random_point;
using abba::testing::random_records;

namespace {

constexpr double kPi = 3.14159265358979323846;

double phi_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

Model make(ModelKind kind, const std::vector<SubjectRecord>& r, int K) {
  return Model(ModelSpec{kind, K, {}, {}}, Dataset(r, K));
}

}  // namespace

TEST(Dataset, RejectsIllegalFields) {
  const SubjectRecord ok{0, 1, 1.5, 3.0, 0};
  auto with = [&](auto mutate) {
    auto s = ok;
    mutate(s);
    return std::vector<SubjectRecord>{ok, s};
  };
  EXPECT_THROW(Dataset(with([](SubjectRecord& s) { s.treatment = 2; }), 1), MalformedInput);
  EXPECT_THROW(Dataset(with([](SubjectRecord& s) { s.y_binary = -1; }), 1), MalformedInput);
  EXPECT_THROW(Dataset(with([](SubjectRecord& s) { s.baseline = 0.0; }), 1), MalformedInput);
  EXPECT_THROW(Dataset(with([](SubjectRecord& s) { s.y_continuous = NAN; }), 1), MalformedInput);
  EXPECT_THROW(Dataset(with([](SubjectRecord& s) { s.subtrial = 3; }), 1), MalformedInput);
  EXPECT_NO_THROW(Dataset(with([](SubjectRecord&) {}), 1));
}

TEST(Dataset, AbsentSubtrialIsValidationErrorButEmptyArmIsAllowed) {
  const std::vector<SubjectRecord> r{{0, 1, 1.0, 3.0, 0}, {2, 0, 1.0, 3.0, 1}};
  EXPECT_THROW(Dataset(r, 3), ValidationError);
  const std::vector<SubjectRecord> one_arm{{0, 1, 1.0, 3.0, 0}, {0, 1, 2.0, 2.0, 1}};
  const Dataset d(one_arm, 1);
  EXPECT_EQ(d.arm_size(0, 0), 0u);
  EXPECT_NO_THROW(make(ModelKind::AbbaHierarchical, one_arm, 1));
}

TEST(Dataset, SubsetKeepsOrderAndRelabels) {
  numkit::Rng rng(1, {1});
  const auto r = random_records(rng, 3, 4);
  const Dataset d(r, 3);
  const Dataset s = d.subset(1);
  ASSERT_EQ(s.size(), 8u);
  EXPECT_EQ(s.subtrials(), 1);
  for (std::size_t i = 0; i < s.size(); ++i) {
    EXPECT_EQ(s[i].subtrial, 0);
    EXPECT_EQ(s[i].baseline, r[8 + i].baseline);
  }
}

TEST(LatentSigns, NoFailureMeansPositiveLatent) {
  const std::vector<SubjectRecord> r{{0, 0, 1, 1, 0}, {0, 0, 1, 1, 1}, {0, 1, 1, 1, 0}};
  EXPECT_EQ(latent_sign_indicators(r), (std::vector<int>{1, 0, 1}));
  std::vector<SubjectRecord> none(5, SubjectRecord{0, 0, 1, 1, 0});
  EXPECT_EQ(latent_sign_indicators(none), std::vector<int>(5, 1));
}

TEST(Responder, ThresholdAndFailureRule) {
  const ResponderRule rule{};
  EXPECT_TRUE(is_responder({0, 0, 1, std::log(25.0), 0}, rule));
  EXPECT_FALSE(is_responder({0, 0, 1, std::log(25.0), 1}, rule));
  EXPECT_FALSE(is_responder({0, 0, 1, std::log(15.0), 0}, rule));
  const ResponderRule das{2.6, Direction::Below, true};
  EXPECT_TRUE(is_responder({0, 0, 1, 2.0, 0}, das));
  EXPECT_FALSE(is_responder({0, 0, 1, 3.0, 0}, das));
  const ResponderRule any{std::log(20.0), Direction::Above, false};
  EXPECT_TRUE(is_responder({0, 0, 1, std::log(25.0), 1}, any));
}

TEST(Layout, DimensionIsFunctionOfKindAndSize) {
  numkit::Rng rng(2, {2});
  const auto r = random_records(rng, 3, 5);  // N = 30
  const Dataset d(r, 3);
  EXPECT_EQ(ParameterLayout(ModelSpec{ModelKind::AbbaHierarchical, 3}, d).dimension(), 6u * 3 + 12 + 2 + 30);
  EXPECT_EQ(ParameterLayout(ModelSpec{ModelKind::AbbaStratified, 3}, d).dimension(), 8u * 3 + 30);
  EXPECT_EQ(ParameterLayout(ModelSpec{ModelKind::BinHierarchical, 3}, d).dimension(), 3u * 3 + 6);
  EXPECT_EQ(ParameterLayout(ModelSpec{ModelKind::BinStratified, 3}, d).dimension(), 3u * 3);
  EXPECT_THROW(ParameterLayout(ModelSpec{ModelKind::AbbaHierarchical, 2}, d), ValidationError);
}

TEST(Layout, TransformsRoundTrip) {
  numkit::Rng rng(3, {3});
  const auto r = random_records(rng, 2, 3);
  for (auto kind : {ModelKind::AbbaHierarchical, ModelKind::AbbaStratified, ModelKind::BinHierarchical}) {
    const ParameterLayout L(ModelSpec{kind, 2}, Dataset(r, 2));
    for (int rep = 0; rep < 50; ++rep) {
      const auto x = random_point(rng, L.dimension(), 4.0);
      for (std::size_t i = 0; i < x.size(); ++i) {
        const double v = L.constrain(i, x[i]);
        EXPECT_NEAR(L.unconstrain(i, v), x[i], 1e-12 * std::max(1.0, std::abs(x[i]))) << L.names()[i];
      }
    }
  }
}

TEST(Layout, HierarchySdNeverBelowFloor) {
  numkit::Rng rng(4, {4});
  const auto r = random_records(rng, 2, 3);
  for (auto kind : {ModelKind::AbbaHierarchical, ModelKind::BinHierarchical}) {
    const ParameterLayout L(ModelSpec{kind, 2}, Dataset(r, 2));
    const double floor = is_abba(kind) ? 0.1 : 0.3;
    for (std::size_t c = 0; c < L.block_width(); ++c) {
      const std::size_t i = L.hyper_sd() + c;
      EXPECT_EQ(L.transform(i), Transform::FloorExp);
      for (double z : {-800.0, -40.0, -1.0, 0.0, 3.0}) EXPECT_GE(L.constrain(i, z), floor);
    }
  }
}

TEST(ParameterVector, RejectsWrongSize) {
  numkit::Rng rng(5, {5});
  const auto r = random_records(rng, 1, 2);
  auto L = std::make_shared<const ParameterLayout>(ModelSpec{ModelKind::BinStratified, 1}, Dataset(r, 1));
  EXPECT_THROW(ParameterVector(L, std::vector<double>(2)), std::invalid_argument);
  EXPECT_NO_THROW(ParameterVector(L, std::vector<double>(3)));
}

TEST(LinearPredictors, ZeroParametersAndTreatmentToggle) {
  const std::vector<SubjectRecord> r{{0, 0, 1.0, 3.0, 0}, {0, 1, 1.0, 3.0, 0}, {0, 1, 2.5, 3.0, 0}};
  const Model m = make(ModelKind::AbbaHierarchical, r, 1);
  const auto& L = *m.layout();
  std::vector<double> x(m.dimension(), 0.0);
  const auto z = m.linear_predictors(x, 2);
  EXPECT_EQ(z.mu1, 0.0);
  EXPECT_EQ(z.mu2, 0.0);

  // Generating values of the null scenario at baseline 1, treated.
  const std::size_t b = L.regression(0);
  x[b + 0] = 1.07;
  x[b + 1] = 0.04;
  x[b + 2] = 0.5;
  x[b + 3] = -0.1;
  const auto p = m.linear_predictors(x, 1);
  EXPECT_DOUBLE_EQ(p.mu1, 1.07);
  EXPECT_DOUBLE_EQ(p.mu2, 0.04);

  x[b + 4] = 0.7;
  x[b + 5] = -0.3;
  const auto t0 = m.linear_predictors(x, 0), t1 = m.linear_predictors(x, 1);
  EXPECT_NEAR(t1.mu1 - t0.mu1, 0.7, 1e-15);
  EXPECT_NEAR(t1.mu2 - t0.mu2, -0.3, 1e-15);
}

TEST(AbbaLikelihood, SingleSubjectHandValue) {
  const std::vector<SubjectRecord> r{{0, 0, 1.0, 0.0, 0}};
  const Model m = make(ModelKind::AbbaStratified, r, 1);
  const std::vector<double> x(m.dimension(), 0.0);  // sigma1 = 1, rho = 0, u = 0.5
  const double want = -0.5 * std::log(2 * kPi) + std::log(0.5) + std::log(0.25);
  EXPECT_NEAR(m.log_likelihood(x), want, 1e-14);
}

TEST(AbbaLikelihood, FactorizesAtZeroCorrelation) {
  const auto c = abba::testing::check_rho_zero_factorization();
  EXPECT_TRUE(c.pass) << c.detail;
}

TEST(AbbaLikelihood, IntegratingLatentCoordinatesRecoversJointLikelihood) {
  const auto c = abba::testing::check_latent_marginalization();
  EXPECT_TRUE(c.pass) << c.detail;
}

TEST(AbbaLikelihood, LatentValuesFollowTruncatedConditional) {
  // Subject-level check of the latent map: integrating y*(u) over u in (0, 1) gives the mean of
  // the truncated conditional normal.
  const std::vector<SubjectRecord> r{{0, 0, 1.3, 2.9, 0}, {0, 1, 0.8, 3.4, 1}};
  const Model m = make(ModelKind::AbbaHierarchical, r, 1);
  const auto& L = *m.layout();
  numkit::Rng rng(6, {6});
  auto x = random_point(rng, m.dimension(), 0.8);
  const double sigma1 = 0.6, rho = -0.45;
  x[L.sigma1(0)] = std::log(sigma1);
  x[L.rho(0)] = std::atanh(rho);
  // Clustered nodes u = (1 - cos(pi s)) / 2 smooth out the endpoint behaviour of Phi^-1.
  const auto q = abba::testing::gauss_legendre(200, 0.0, 1.0);
  for (std::size_t i = 0; i < r.size(); ++i) {
    const auto lp = m.linear_predictors(x, i);
    const double mc = lp.mu2 + rho * (r[i].y_continuous - lp.mu1) / sigma1;
    const double sc = std::sqrt(1 - rho * rho);
    const double alpha = -mc / sc;
    const double dens = std::exp(-0.5 * alpha * alpha) / std::sqrt(2 * kPi);
    const double want = r[i].y_binary == 0 ? mc + sc * dens / (1 - phi_cdf(alpha)) : mc - sc * dens / phi_cdf(alpha);
    double integral = 0.0;
    for (std::size_t j = 0; j < q.x.size(); ++j) {
      const double u = 0.5 * (1 - std::cos(kPi * q.x[j]));
      const double du = 0.5 * kPi * std::sin(kPi * q.x[j]);
      x[L.latent(i)] = std::log(u / (1 - u));
      integral += q.w[j] * du * m.latent_values(x)[i];
    }
    EXPECT_NEAR(integral, want, 1e-6) << "subject " << i;
  }
}

TEST(AbbaLikelihood, LatentSignMatchesFailureIndicator) {
  numkit::Rng rng(7, {7});
  const auto r = random_records(rng, 2, 6);
  const Model m = make(ModelKind::AbbaHierarchical, r, 2);
  for (int rep = 0; rep < 20; ++rep) {
    const auto ys = m.latent_values(random_point(rng, m.dimension()));
    for (std::size_t i = 0; i < r.size(); ++i) EXPECT_EQ(ys[i] > 0, r[i].y_binary == 0);
  }
}

TEST(BinLikelihood, ZeroParametersGiveLogHalfPerSubject) {
  numkit::Rng rng(8, {8});
  const auto r = random_records(rng, 2, 5);
  const Model m = make(ModelKind::BinHierarchical, r, 2);
  const std::vector<double> x(m.dimension(), 0.0);
  EXPECT_NEAR(m.log_likelihood(x), static_cast<double>(r.size()) * std::log(0.5), 1e-12);
}

TEST(BinLikelihood, MatchesDirectLogisticLikelihood) {
  numkit::Rng rng(9, {9});
  for (int rep = 0; rep < 50; ++rep) {
    const int K = 1 + rep % 3;
    const auto r = random_records(rng, K, 6);
    const Model m = make(rep % 2 ? ModelKind::BinHierarchical : ModelKind::BinStratified, r, K);
    const auto x = random_point(rng, m.dimension(), 2.0);
    const auto& L = *m.layout();
    double ref = 0.0;
    for (const auto& s : r) {
      const std::size_t b = L.regression(s.subtrial);
      const double xi = x[b] + x[b + 1] * std::log(s.baseline) + x[b + 2] * s.treatment;
      const bool y = s.y_continuous >= std::log(20.0) && s.y_binary == 0;
      ref += (y ? xi : 0.0) - std::log1p(std::exp(xi));
    }
    EXPECT_NEAR(m.log_likelihood(x), ref, 1e-10 * std::max(1.0, std::abs(ref)));
  }
}

TEST(Gradient, MatchesFiniteDifferences) {
  const auto c = abba::testing::check_gradients();
  EXPECT_TRUE(c.pass) << c.detail;
}

TEST(Gradient, TreatmentEffectAtZeroCorrelation) {
  numkit::Rng rng(10, {10});
  const auto r = random_records(rng, 2, 5);
  const Model m = make(ModelKind::AbbaHierarchical, r, 2);
  const auto& L = *m.layout();
  auto x = random_point(rng, m.dimension());
  x[L.rho(0)] = 0.0;
  std::vector<double> g(x.size());
  m.log_density_gradient(x, g);
  const double sigma1 = std::exp(x[L.sigma1(0)]);
  for (int k = 0; k < 2; ++k) {
    const std::size_t t1 = L.regression(k) + 4;
    double want = 0.0;
    for (std::size_t i : m.data().members(k)) {
      if (r[i].treatment != 1) continue;
      want += (r[i].y_continuous - m.linear_predictors(x, i).mu1) / (sigma1 * sigma1);
    }
    const double mean = x[L.hyper_mean() + 4];
    const double sd = 0.1 + std::exp(x[L.hyper_sd() + 4]);
    want -= (x[t1] - mean) / (sd * sd);
    EXPECT_NEAR(g[t1], want, 1e-10 * std::max(1.0, std::abs(want)));
  }
}

TEST(Prior, SymmetricInRegressionCoefficientsAtZero) {
  numkit::Rng rng(11, {11});
  const auto r = random_records(rng, 2, 3);
  for (auto kind : {ModelKind::AbbaStratified, ModelKind::BinStratified}) {
    const Model m = make(kind, r, 2);
    std::vector<double> x(m.dimension(), 0.0);
    for (std::size_t c = 0; c < m.layout()->block_width(); ++c) {
      const std::size_t i = m.layout()->regression(1) + c;
      auto xp = x, xm = x;
      xp[i] = 0.3;
      xm[i] = -0.3;
      EXPECT_EQ(m.log_prior(xp), m.log_prior(xm));
    }
  }
}

TEST(Posterior, StratifiedJointIsSumOfSubtrialModels) {
  numkit::Rng rng(12, {12});
  for (auto kind : {ModelKind::AbbaStratified, ModelKind::BinStratified}) {
    const auto r = random_records(rng, 3, 4);
    const Model m = make(kind, r, 3);
    const auto& L = *m.layout();
    for (int rep = 0; rep < 20; ++rep) {
      const auto x = random_point(rng, m.dimension());
      double sum = 0.0;
      for (int k = 0; k < 3; ++k) {
        const Model sub = m.subtrial_model(k);
        ASSERT_EQ(sub.dimension(), L.block_size(k));
        sum += sub.log_density(std::span<const double>(x).subspan(L.block_offset(k), L.block_size(k)));
      }
      EXPECT_NEAR(m.log_density(x), sum, 1e-11 * std::abs(sum));
    }
  }
}

TEST(Posterior, InvariantUnderSubjectPermutation) {
  numkit::Rng rng(13, {13});
  for (auto kind : {ModelKind::AbbaHierarchical, ModelKind::AbbaStratified, ModelKind::BinHierarchical,
                    ModelKind::BinStratified}) {
    const auto r = random_records(rng, 2, 5);
    std::vector<std::size_t> perm(r.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::reverse(perm.begin(), perm.end());
    std::rotate(perm.begin(), perm.begin() + 3, perm.end());
    std::vector<SubjectRecord> rp;
    for (std::size_t i : perm) rp.push_back(r[i]);
    const Model a = make(kind, r, 2), b = make(kind, rp, 2);
    const auto& La = *a.layout();
    const auto& Lb = *b.layout();
    for (int rep = 0; rep < 10; ++rep) {
      const auto x = random_point(rng, a.dimension());
      std::vector<double> y = x;
      if (La.has_latent()) {
        // Same parameters, latent coordinates following their subjects.
        for (std::size_t j = 0; j < perm.size(); ++j) y[Lb.latent(j)] = x[La.latent(perm[j])];
      }
      EXPECT_NEAR(a.log_density(x), b.log_density(y), 1e-11 * std::abs(a.log_density(x)));
    }
  }
}

TEST(Posterior, FreeFunctionsMatchModelAndCheckKind) {
  numkit::Rng rng(14, {14});
  const auto r = random_records(rng, 2, 3);
  const Dataset d(r, 2);
  const ModelSpec abba{ModelKind::AbbaHierarchical, 2}, bin{ModelKind::BinHierarchical, 2};
  const Model ma(abba, d), mb(bin, d);
  const ParameterVector pa(ma.layout(), random_point(rng, ma.dimension()));
  const ParameterVector pb(mb.layout(), random_point(rng, mb.dimension()));
  EXPECT_EQ(abba_log_posterior(abba, d, pa), ma.log_density(pa.unconstrained()));
  EXPECT_EQ(bin_log_posterior(bin, d, pb), mb.log_density(pb.unconstrained()));
  EXPECT_THROW(abba_log_posterior(bin, d, pb), ValidationError);
  EXPECT_THROW(bin_log_posterior(abba, d, pa), ValidationError);
  std::vector<double> g(ma.dimension());
  ma.log_density_gradient(pa.unconstrained(), g);
  EXPECT_EQ(gradient(abba, d, pa), g);
}

TEST(Posterior, RejectsMismatchedSubtrialCount) {
  numkit::Rng rng(15, {15});
  const auto r = random_records(rng, 2, 3);
  EXPECT_THROW(Model(ModelSpec{ModelKind::AbbaHierarchical, 3}, Dataset(r, 2)), ValidationError);
  PriorConfig bad;
  bad.lkj_eta = 0.0;
  EXPECT_THROW(Model(ModelSpec{ModelKind::AbbaHierarchical, 2, bad}, Dataset(r, 2)), ValidationError);
}

TEST(Posterior, FittedLatentProbabilityTracksObservedNoFailureShare) {
  // Control subjects only at baseline 1: P(y* > 0) = Phi(beta2).
  std::vector<SubjectRecord> r;
  for (int i = 0; i < 60; ++i) r.push_back({0, 0, 1.0, 3.0 + 0.01 * (i % 7), i < 18 ? 1 : 0});
  const Model m = make(ModelKind::AbbaStratified, r, 1);
  posterior::FitOptions opt;
  opt.sampler = *sampler::preset("smoke");
  opt.sampler.warmup_iters = 400;
  opt.sampler.sampling_iters = 600;
  opt.sampler.seed = 5;
  const auto fit = posterior::fit(m, opt);
  const auto& d = fit.draws();
  const std::size_t b2 = m.layout()->regression(0) + 1;
  std::vector<double> p;
  for (std::size_t c = 0; c < d.chains.size(); ++c) {
    for (double v : d.column(b2, c)) p.push_back(phi_cdf(v));
  }
  const double mean = std::accumulate(p.begin(), p.end(), 0.0) / static_cast<double>(p.size());
  double ss = 0.0;
  for (double v : p) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(p.size() - 1));
  EXPECT_NEAR(mean, 42.0 / 60.0, 2 * sd);
}

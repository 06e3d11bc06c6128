#include <benchmark/benchmark.h>

#include <vector>

#include "abba/numkit/hdi.hpp"
#include "abba/numkit/normal.hpp"
#include "abba/numkit/orthant.hpp"
#include "abba/numkit/random.hpp"

namespace {

void BM_OrthantGenz(benchmark::State& state) {
  const double rho = static_cast<double>(state.range(0)) / 100.0;
  double h = -1.5;
  for (auto _ : state) {
    benchmark::DoNotOptimize(abba::numkit::std_bvn_upper(h, 0.3, rho));
    h += 1e-6;
  }
}
BENCHMARK(BM_OrthantGenz)->Arg(0)->Arg(30)->Arg(80)->Arg(95);

void BM_OrthantQuadrature(benchmark::State& state) {
  const abba::numkit::Cov2 cov(0.5, abba::numkit::Correlation2(0.3));
  double mu = 2.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(abba::numkit::bvn_upper_orthant_quadrature(mu, 0.1, cov, 3.0, 0.0));
    mu += 1e-6;
  }
}
BENCHMARK(BM_OrthantQuadrature);

void BM_LogCdfMills(benchmark::State& state) {
  double z = -3.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(abba::numkit::log_cdf_and_mills(z));
    z += 1e-7;
  }
}
BENCHMARK(BM_LogCdfMills);

void BM_Hdi(benchmark::State& state) {
  abba::numkit::Rng rng(7, {1});
  std::vector<double> draws(static_cast<std::size_t>(state.range(0)));
  for (double& d : draws) d = rng.normal();
  for (auto _ : state) benchmark::DoNotOptimize(abba::numkit::hdi(draws, 0.95));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Hdi)->Arg(2000)->Arg(20000);

void BM_PhiloxNormal(benchmark::State& state) {
  abba::numkit::Rng rng(11, {2});
  for (auto _ : state) benchmark::DoNotOptimize(rng.normal());
}
BENCHMARK(BM_PhiloxNormal);

}  // namespace

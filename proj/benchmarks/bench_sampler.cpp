#include <benchmark/benchmark.h>

#include <span>

#include "abba/sampler/diagnostics.hpp"
#include "abba/sampler/nuts.hpp"

namespace {

abba::sampler::Target gaussian(std::size_t dim) {
  abba::sampler::Target t;
  t.dimension = dim;
  t.log_density_gradient = [](std::span<const double> x, std::span<double> g) {
    double lp = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      lp -= 0.5 * x[i] * x[i];
      g[i] = -x[i];
    }
    return lp;
  };
  return t;
}

void BM_NutsGaussian(benchmark::State& state) {
  const auto target = gaussian(static_cast<std::size_t>(state.range(0)));
  abba::sampler::SamplerConfig cfg;
  cfg.chains = 1;
  cfg.warmup_iters = 200;
  cfg.sampling_iters = 200;
  std::uint64_t seed = 0;
  for (auto _ : state) {
    cfg.seed = ++seed;
    benchmark::DoNotOptimize(abba::sampler::run(target, cfg));
  }
}
BENCHMARK(BM_NutsGaussian)->Arg(10)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_Diagnostics(benchmark::State& state) {
  abba::sampler::SamplerConfig cfg;
  cfg.chains = 2;
  cfg.warmup_iters = 100;
  cfg.sampling_iters = 1000;
  const auto draws = abba::sampler::run(gaussian(20), cfg);
  for (auto _ : state) benchmark::DoNotOptimize(abba::sampler::diagnostics(draws));
}
BENCHMARK(BM_Diagnostics)->Unit(benchmark::kMillisecond);

}  // namespace

#include <benchmark/benchmark.h>

#include <vector>

#include "abba/models/model.hpp"
#include "abba/simlab/generate.hpp"
#include "abba/simlab/scenario.hpp"

namespace {

abba::models::Dataset trial() {
  auto spec = *abba::simlab::find_scenario("scenario4");
  for (auto& s : spec.subtrials) s.beta = {2.78, -0.14};
  spec.calibrated = true;
  return abba::models::Dataset(abba::simlab::simulate_trial(spec, {}, 5, 0).records, 3);
}

void BM_Gradient(benchmark::State& state) {
  const auto kind = static_cast<abba::models::ModelKind>(state.range(0));
  const abba::models::Model model({kind, 3}, trial());
  std::vector<double> x(model.dimension(), 0.1), g(model.dimension());
  for (auto _ : state) {
    benchmark::DoNotOptimize(model.log_density_gradient(x, g));
    x[0] += 1e-9;
  }
  state.SetLabel(std::string(abba::models::to_string(kind)));
}
BENCHMARK(BM_Gradient)->DenseRange(0, 3);

}  // namespace

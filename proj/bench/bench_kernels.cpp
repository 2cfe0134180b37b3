// Copyright 2026 The nlfilter Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// Serial reference vs OpenMP kernels. Arg(0) is serial, Arg(1) parallel.

#include <benchmark/benchmark.h>

#include "nlfilter/filter.hpp"
#include "nlfilter/girsanov.hpp"
#include "nlfilter/models.hpp"
#include "nlfilter/residuals.hpp"
#include "nlfilter/simulate.hpp"

namespace {

using namespace nlfilter;

Exec exec_of(const benchmark::State& state) { return state.range(0) ? Exec::parallel : Exec::serial; }

void BM_FilterStep(benchmark::State& state) {
  const SignalModel model = models::jump_ou();
  FilterConfig config;
  config.n_particles = 10000;
  config.seed = 1;
  config.exec = exec_of(state);
  config.resample_threshold = 0.0;
  ParticleCloud cloud = init_cloud(model, config);
  const Vector dy = Vector::Constant(1, 1e-3);
  for (auto _ : state) {
    step(cloud, model, as_span(dy), 1e-3, config);
    if (cloud.step % 200 == 0) std::fill(cloud.log_weights.begin(), cloud.log_weights.end(), 0.0);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(config.n_particles));
}
BENCHMARK(BM_FilterStep)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);

void BM_SimulatePaths(benchmark::State& state) {
  const SignalModel model = models::jump_ou();
  const TimeGrid grid = TimeGrid::make(1.0, 1e-3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(simulate_paths(model, grid, 1, 64, exec_of(state)));
  }
  state.SetItemsProcessed(state.iterations() * 64);
}
BENCHMARK(BM_SimulatePaths)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_Diagnostics(benchmark::State& state) {
  const Scenario s = revuz_yor_scenario(1.0, TimeGrid::make(1.0, 1e-3), 1);
  DiagnosticsOptions o;
  o.n_paths = 1000;
  o.measure = SamplingMeasure::transformed;
  o.exec = exec_of(state);
  for (auto _ : state) benchmark::DoNotOptimize(run_diagnostics(s, o));
  state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_Diagnostics)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_Residuals(benchmark::State& state) {
  ResidualOptions o;
  o.n_runs = 8;
  o.grid = TimeGrid::make(0.5, 1e-3);
  o.filter.n_particles = 100;
  o.seed = 1;
  o.exec = exec_of(state);
  const SignalModel m = models::correlated_linear();
  for (auto _ : state) benchmark::DoNotOptimize(equation_residuals(m, test_functions::battery(1), o));
}
BENCHMARK(BM_Residuals)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

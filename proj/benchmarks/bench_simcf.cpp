// SPDX-License-Identifier: Apache-2.0
//
// simcf: uplink simulation and optimization for SIM-enhanced cell-free massive MIMO
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include <benchmark/benchmark.h>

#include "simcf/optimizers.hpp"
#include "simcf/scenario.hpp"
#include "simcf/sim_physics.hpp"
#include "simcf/system_model.hpp"

namespace {

using namespace simcf;

SystemConfig bench_config(int N, int M) {
  SystemConfig c;
  c.N = N;
  c.M = M;
  c.validate();
  return c;
}

SystemModel bench_model(const SystemConfig& cfg) {
  Drop d = generate_drop(cfg, 99);
  Rng r = make_rng(99, Stream::kPhaseInit, 0);
  SystemModel m(cfg, std::move(d), PhaseTensor::random(cfg.L, cfg.M, cfg.N, r));
  m.set_pilots(allocate_pilots(m.drop(), cfg.tau_p).pilot_of);
  return m;
}

// G W1 for one SIM, N atoms, 5 layers.
void BM_CascadeTimesW1(benchmark::State& state) {
  const auto cfg = bench_config(static_cast<int>(state.range(0)), 5);
  const auto ds = build_diffraction_set(SimGeometry::from_config(cfg), cfg.wavelength);
  Rng r(1);
  const PhaseTensor ph = PhaseTensor::random(1, cfg.M, cfg.N, r);
  for (auto _ : state) benchmark::DoNotOptimize(cascade_times_w1(ds, ph.ap(0)));
}
BENCHMARK(BM_CascadeTimesW1)->Arg(16)->Arg(64)->Arg(144);

// One candidate evaluation of the beamforming search: statistics of one AP
// under trial phases plus the sum SE.
void BM_ProposeAndScore(benchmark::State& state) {
  const auto cfg = bench_config(static_cast<int>(state.range(0)), 5);
  const SystemModel m = bench_model(cfg);
  std::vector<double> ph(m.phases().ap(3).begin(), m.phases().ap(3).end());
  ph.back() += 0.1;
  for (auto _ : state) {
    auto cand = m.propose(3, ph);
    benchmark::DoNotOptimize(m.sum_se_with(cand, m.drop().p, Decoder::kLsfd));
  }
}
BENCHMARK(BM_ProposeAndScore)->Arg(16)->Arg(64);

void BM_SumSe(benchmark::State& state) {
  const auto cfg = bench_config(64, 5);
  const SystemModel m = bench_model(cfg);
  const Decoder d = state.range(0) == 0 ? Decoder::kLsfd : Decoder::kEgcd;
  for (auto _ : state) benchmark::DoNotOptimize(m.sum_se(d, m.drop().p));
}
BENCHMARK(BM_SumSe)->Arg(0)->Arg(1);

}  // namespace

BENCHMARK_MAIN();

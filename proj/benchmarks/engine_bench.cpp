// Copyright 2026 The LKTD Authors. All rights reserved.
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


// Per-update cost of the sampling engines on the indoor network.
//
//   lktd_bench --benchmark_filter=Engine

#include <benchmark/benchmark.h>

#include <vector>

#include "lktd/approximator.hpp"
#include "lktd/envs.hpp"
#include "lktd/replay.hpp"
#include "lktd/samplers.hpp"
#include "lktd/statespace.hpp"

namespace {

using namespace lktd;

TransitionBatch random_batch(const EnvSpec& env, int n, Rng& rng) {
  std::vector<Transition> ts(static_cast<std::size_t>(n));
  for (auto& t : ts) {
    const int x = static_cast<int>(rng() % kGridSize);
    const int y = static_cast<int>(rng() % kGridSize);
    t.action = static_cast<int>(rng() % 4);
    t.next_action = static_cast<int>(rng() % 4);
    const Eigen::Vector2i nx = indoor_move(x, y, t.action);
    t.state = network_input(env, Eigen::Vector2d(x, y));
    t.next_state = network_input(env, nx.cast<double>());
    t.reward = -1.0;
    t.terminal = nx == Eigen::Vector2i(kGridSize - 1, kGridSize - 1);
  }
  return TransitionBatch::from(ts);
}

void BM_Engine(benchmark::State& state) {
  const auto engine = static_cast<Engine>(state.range(0));
  const int width = static_cast<int>(state.range(1));
  const int batch_n = static_cast<int>(state.range(2));
  const MlpSpec spec{{2, width, width, 4}};
  const EnvSpec env = EnvSpec::make(EnvKind::kIndoorEscape);
  Rng rng(7);
  BellmanMeasurement model(MeasurementMode::kQResidual, spec, random_batch(env, batch_n, rng),
                           1.0);
  SamplerConfig c;
  SamplerState st = SamplerState::create(engine, init_params(spec, rng), c);
  for (auto _ : state) {
    sampler_step(st, model, c, rng);
    benchmark::DoNotOptimize(st.theta.data());
  }
  state.SetLabel(std::string(to_string(engine)));
}

void engine_args(benchmark::internal::Benchmark* b) {
  for (Engine e : {Engine::kLktd, Engine::kSgld, Engine::kSghmc, Engine::kAdamDqn}) {
    for (int w : {32, 64}) b->Args({static_cast<long>(e), w, 100});
  }
  // Dense covariance: p^2 memory, so only the small net.
  b->Args({static_cast<long>(Engine::kKova), 32, 100});
}

BENCHMARK(BM_Engine)->Apply(engine_args)->Unit(benchmark::kMillisecond);

void BM_ForwardVjp(benchmark::State& state) {
  const int width = static_cast<int>(state.range(0));
  const MlpSpec spec{{4, width, width, 2}};
  Rng rng(3);
  const ParamVector params = init_params(spec, rng);
  Eigen::MatrixXd x(4, 200);
  fill_normal(rng, x, 1.0);
  const Eigen::MatrixXd cot = Eigen::MatrixXd::Ones(2, 200);
  MlpTape tape(spec);
  for (auto _ : state) {
    tape.forward(params, x);
    benchmark::DoNotOptimize(tape.backward(cot).data());
  }
}
BENCHMARK(BM_ForwardVjp)->Arg(32)->Arg(64)->Unit(benchmark::kMicrosecond);

void BM_ReplaySample(benchmark::State& state) {
  ReplayBuffer buffer(static_cast<std::size_t>(state.range(0)));
  Rng rng(5);
  Transition t;
  t.state = Eigen::Vector2d(0.0, 0.0);
  t.next_state = t.state;
  for (std::int64_t i = 0; i < state.range(0); ++i) buffer.push(t, i);
  for (auto _ : state) {
    benchmark::DoNotOptimize(buffer.sample(100, rng).rewards.data());
  }
}
BENCHMARK(BM_ReplaySample)->Arg(1000)->Arg(50000);

}  // namespace

BENCHMARK_MAIN();

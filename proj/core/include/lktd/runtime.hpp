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


#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "lktd/approximator.hpp"
#include "lktd/envs.hpp"
#include "lktd/random.hpp"
#include "lktd/samplers.hpp"

namespace lktd {

struct RunConfig {
  EnvSpec env;
  Engine engine = Engine::kLktd;
  SamplerConfig sampler;
  std::vector<int> hidden{32, 32};

  std::int64_t total_steps = 200000;
  int train_freq = 10;
  /// Parameter updates per training trigger.
  int gradient_steps = 1;
  int batch_size = 100;
  std::size_t buffer_capacity = 10000;
  std::int64_t learning_starts = 1000;

  double exploration_initial = 1.0;
  double exploration_fraction = 0.1;
  double exploration_final = 0.01;

  /// Copy the online parameters into the target network every this many
  /// environment steps (TD-target mode only).
  std::int64_t target_update_interval = 1000;
  std::size_t pool_size = 3000;
  int eval_checkpoints = 100;
  int eval_episodes = 5;
  /// Train on freshly generated transitions instead of the replay buffer.
  bool on_policy = false;
  std::uint64_t seed = 0;

  MlpSpec network() const;
  void validate() const;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Ring of the most recent parameter vectors, oldest first.
class SamplePool {
 public:
  explicit SamplePool(std::size_t capacity = 0);

  void push(const ParamVector& params);
  std::size_t size() const { return members_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return members_.empty(); }
  /// i-th oldest member.
  const ParamVector& at(std::size_t i) const;
  /// Members in update order.
  std::vector<ParamVector> members() const;

 private:
  std::size_t capacity_;
  std::size_t head_ = 0;
  std::vector<ParamVector> members_;
};

struct EvalRecord {
  std::int64_t step = 0;
  /// Mean return of training episodes finished since the previous
  /// checkpoint (the latest finished one if none did; NaN before the first).
  double train_reward = std::numeric_limits<double>::quiet_NaN();
  double eval_reward = 0.0;
  double best_reward = 0.0;
};

struct RunArtifacts {
  MlpSpec network;
  std::vector<double> episode_rewards;
  std::vector<std::int64_t> episode_end_steps;
  std::vector<EvalRecord> evaluations;
  ParamVector best_params;
  double best_reward = -std::numeric_limits<double>::infinity();
  std::int64_t best_step = -1;
  ParamVector final_params;
  SamplePool pool;
  std::vector<double> update_ms;
  std::int64_t updates = 0;
  bool failed = false;
  std::string failure;

  double mean_update_ms() const;
};

/// Uniform action with probability eps, otherwise an argmax with uniform
/// tie-breaking among exactly equal maxima.
int epsilon_greedy(const Eigen::VectorXd& q_values, double eps, Rng& rng);

/// Linear decay from exploration_initial to exploration_final over the
/// first exploration_fraction * total_steps steps, constant afterwards.
double exploration_schedule(const RunConfig& config, std::int64_t step);

/// Runs the act, store, train, evaluate loop. A sampler abort ends the run
/// early with `failed` set and the artifacts gathered so far.
RunArtifacts train(const RunConfig& config);

/// Greedy (eps = 0) return of one episode.
double evaluate_episode(const EnvSpec& env, const MlpSpec& spec,
                        const ParamVector& params, Rng& rng);

/// Q_theta(s, action) for every pool member (rows) and every input column
/// (columns).
Eigen::MatrixXd pool_q_values(const SamplePool& pool, const MlpSpec& spec,
                              const Eigen::MatrixXd& inputs, int action);

/// Same for every action at once: element a is the M x S matrix of action a.
std::vector<Eigen::MatrixXd> pool_q_values_all(const SamplePool& pool,
                                               const MlpSpec& spec,
                                               const Eigen::MatrixXd& inputs);

/// Binary pool snapshot. Layout (little-endian host order): the 8 bytes
/// "LKTDPOOL", uint32 version (1), uint64 network shape hash, uint64 p,
/// uint64 M, then M * p doubles, oldest member first.
void write_pool(const std::string& path, const SamplePool& pool,
                const MlpSpec& spec);
/// Reads a snapshot written for `spec`; a shape mismatch is an IoError.
SamplePool read_pool(const std::string& path, const MlpSpec& spec);

}  // namespace lktd

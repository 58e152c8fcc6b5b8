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


#include "lktd/runtime.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <optional>
#include <random>
#include <string>

#include "lktd/error.hpp"
#include "lktd/replay.hpp"
#include "lktd/statespace.hpp"

namespace lktd {

MlpSpec RunConfig::network() const {
  MlpSpec spec;
  spec.layer_sizes.push_back(env.obs_dim());
  spec.layer_sizes.insert(spec.layer_sizes.end(), hidden.begin(), hidden.end());
  spec.layer_sizes.push_back(env.num_actions());
  return spec;
}

void RunConfig::validate() const {
  env.validate();
  sampler.validate(engine);
  network().validate();
  detail::require(total_steps >= 0, "runtime.total_steps must be >= 0");
  detail::require(train_freq >= 1, "runtime.train_freq must be >= 1");
  detail::require(gradient_steps >= 1, "runtime.gradient_steps must be >= 1");
  detail::require(batch_size >= 1, "runtime.batch_size must be >= 1");
  detail::require(buffer_capacity >= 1, "runtime.buffer_capacity must be >= 1");
  detail::require(learning_starts >= 0, "runtime.learning_starts must be >= 0");
  detail::require(exploration_initial >= 0.0 && exploration_initial <= 1.0,
                  "runtime.exploration_initial must lie in [0, 1]");
  detail::require(exploration_final >= 0.0 && exploration_final <= 1.0,
                  "runtime.exploration_final must lie in [0, 1]");
  detail::require(exploration_fraction >= 0.0 && exploration_fraction <= 1.0,
                  "runtime.exploration_fraction must lie in [0, 1]");
  detail::require(target_update_interval >= 1,
                  "runtime.target_update_interval must be >= 1");
  detail::require(pool_size >= 1, "runtime.pool_size must be >= 1");
  detail::require(eval_checkpoints >= 0, "runtime.eval_checkpoints must be >= 0");
  detail::require(eval_episodes >= 1, "runtime.eval_episodes must be >= 1");
  if (engine == Engine::kAdamDqn) {
    detail::require(sampler.mode == MeasurementMode::kTdTarget,
                    "the dqn engine needs sampler.mode = td_target");
  }
  if (sampler.mode == MeasurementMode::kVResidual) {
    throw ConfigError(
        "sampler.mode = v_residual needs a scalar value head; the runtime "
        "trains action-value networks");
  }
}

SamplePool::SamplePool(std::size_t capacity) : capacity_(capacity) {}

void SamplePool::push(const ParamVector& params) {
  if (capacity_ == 0) return;
  if (members_.size() < capacity_) {
    members_.push_back(params);
  } else {
    members_[head_] = params;
    head_ = (head_ + 1) % capacity_;
  }
}

const ParamVector& SamplePool::at(std::size_t i) const {
  if (i >= size()) throw UsageError("pool index out of range");
  return members_[(head_ + i) % members_.size()];
}

std::vector<ParamVector> SamplePool::members() const {
  std::vector<ParamVector> out;
  out.reserve(size());
  for (std::size_t i = 0; i < size(); ++i) out.push_back(at(i));
  return out;
}

double RunArtifacts::mean_update_ms() const {
  if (update_ms.empty()) return 0.0;
  return std::accumulate(update_ms.begin(), update_ms.end(), 0.0) /
         static_cast<double>(update_ms.size());
}

int epsilon_greedy(const Eigen::VectorXd& q_values, double eps, Rng& rng) {
  const auto actions = static_cast<int>(q_values.size());
  if (actions == 0) throw UsageError("epsilon_greedy needs at least one action");
  if (!q_values.allFinite()) throw NumericError("Q-values are not finite");
  if (eps > 0.0) {
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    if (coin(rng) < eps) {
      std::uniform_int_distribution<int> pick(0, actions - 1);
      return pick(rng);
    }
  }
  const double best = q_values.maxCoeff();
  const auto ties = static_cast<int>((q_values.array() == best).count());
  int k = 0;
  if (ties > 1) {
    std::uniform_int_distribution<int> pick(0, ties - 1);
    k = pick(rng);
  }
  for (int a = 0; a < actions; ++a) {
    if (q_values[a] == best && k-- == 0) return a;
  }
  return actions - 1;
}

double exploration_schedule(const RunConfig& config, std::int64_t step) {
  const double window =
      config.exploration_fraction * static_cast<double>(config.total_steps);
  if (window <= 0.0 || static_cast<double>(step) >= window) {
    return config.exploration_final;
  }
  return config.exploration_initial +
         (config.exploration_final - config.exploration_initial) *
             (static_cast<double>(step) / window);
}

namespace {

int act(const EnvSpec& env, const MlpSpec& spec, const ParamVector& params,
        const EnvState& state, double eps, Rng& rng) {
  const Eigen::MatrixXd q =
      mlp_forward(spec, params, network_input(env, state.observation));
  return epsilon_greedy(q.col(0), eps, rng);
}

std::vector<std::int64_t> checkpoint_steps(std::int64_t total, int count) {
  std::vector<std::int64_t> steps;
  for (int i = 1; i <= count; ++i) {
    const std::int64_t s = total * i / count;
    if (s >= 1 && (steps.empty() || steps.back() != s)) steps.push_back(s);
  }
  return steps;
}

}  // namespace

double evaluate_episode(const EnvSpec& env, const MlpSpec& spec,
                        const ParamVector& params, Rng& rng) {
  EnvState state = env_reset(env, rng);
  double total = 0.0;
  while (!state.done()) {
    const int a = act(env, spec, params, state, 0.0, rng);
    StepResult r = env_step(env, state, a, rng);
    total += r.reward;
    state = std::move(r.state);
  }
  return total;
}

RunArtifacts train(const RunConfig& config) {
  config.validate();
  const MlpSpec spec = config.network();
  const EnvSpec& env = config.env;
  const SamplerConfig& sampler = config.sampler;
  const bool use_target = sampler.mode == MeasurementMode::kTdTarget;

  RunArtifacts art;
  art.network = spec;
  art.pool = SamplePool(config.pool_size);

  Rng init_rng = make_stream(config.seed, StreamPurpose::kInit);
  Rng env_rng = make_stream(config.seed, StreamPurpose::kEnv);
  Rng explore_rng = make_stream(config.seed, StreamPurpose::kExploration);
  Rng sampler_rng = make_stream(config.seed, StreamPurpose::kSampler);
  Rng buffer_rng = make_stream(config.seed, StreamPurpose::kBuffer);
  Rng eval_rng = make_stream(config.seed, StreamPurpose::kEval);

  SamplerState state =
      SamplerState::create(config.engine, init_params(spec, init_rng), sampler);
  ParamVector target = state.theta;
  ReplayBuffer buffer(config.buffer_capacity);
  std::vector<Transition> fresh;

  const std::vector<std::int64_t> checkpoints =
      checkpoint_steps(config.total_steps, config.eval_checkpoints);
  std::size_t next_checkpoint = 0;
  double window_sum = 0.0;
  int window_count = 0;

  EnvState env_state = env_reset(env, env_rng);
  double episode_return = 0.0;
  std::optional<Transition> pending;

  auto store = [&](const Transition& t, std::int64_t stamp) {
    if (config.on_policy) {
      fresh.push_back(t);
    } else {
      buffer.push(t, stamp);
    }
  };

  std::int64_t step = 1;
  try {
  for (; step <= config.total_steps; ++step) {
    const double eps = exploration_schedule(config, step - 1);
    const int action = act(env, spec, state.theta, env_state, eps, explore_rng);
    if (pending) {
      pending->next_action = action;
      store(*pending, step - 1);
      pending.reset();
    }

    StepResult result = env_step(env, env_state, action, env_rng);
    episode_return += result.reward;
    Transition t;
    t.state = network_input(env, env_state.observation);
    t.action = action;
    t.reward = result.reward;
    t.next_state = network_input(env, result.state.observation);
    t.terminal = result.terminal;
    if (result.terminal) {
      store(t, step);
    } else if (result.state.truncated) {
      // The episode stops here, so a' is drawn but never executed.
      t.next_action = act(env, spec, state.theta, result.state,
                          exploration_schedule(config, step), explore_rng);
      store(t, step);
    } else {
      pending = std::move(t);
    }

    if (result.state.done()) {
      art.episode_rewards.push_back(episode_return);
      art.episode_end_steps.push_back(step);
      window_sum += episode_return;
      ++window_count;
      episode_return = 0.0;
      env_state = env_reset(env, env_rng);
    } else {
      env_state = std::move(result.state);
    }

    const bool ready =
        config.on_policy
            ? fresh.size() >= static_cast<std::size_t>(config.batch_size)
            : !buffer.empty() &&
                  static_cast<std::int64_t>(buffer.size()) >= config.learning_starts;
    if (step % config.train_freq == 0 && ready) {
        for (int g = 0; g < config.gradient_steps; ++g) {
          const auto start = std::chrono::steady_clock::now();
          TransitionBatch batch;
          if (config.on_policy) {
            batch = TransitionBatch::from(std::vector<Transition>(
                fresh.end() - config.batch_size, fresh.end()));
          } else {
            batch = buffer.sample(static_cast<std::size_t>(config.batch_size),
                                  buffer_rng);
          }
          BellmanMeasurement model(sampler.mode, spec, batch, sampler.gamma,
                                   use_target ? &target : nullptr,
                                   sampler.bootstrap);
          sampler_step(state, model, sampler, sampler_rng);
          const auto stop = std::chrono::steady_clock::now();
          art.update_ms.push_back(
              std::chrono::duration<double, std::milli>(stop - start).count());
          art.pool.push(state.theta);
          ++art.updates;
        }
      if (config.on_policy) fresh.clear();
    }
    if (use_target && step % config.target_update_interval == 0) {
      target = state.theta;
    }

    if (next_checkpoint < checkpoints.size() &&
        step == checkpoints[next_checkpoint]) {
      ++next_checkpoint;
      EvalRecord record;
      record.step = step;
      if (window_count > 0) {
        record.train_reward = window_sum / window_count;
      } else if (!art.episode_rewards.empty()) {
        record.train_reward = art.episode_rewards.back();
      }
      window_sum = 0.0;
      window_count = 0;
      double eval_sum = 0.0;
      for (int e = 0; e < config.eval_episodes; ++e) {
        eval_sum += evaluate_episode(env, spec, state.theta, eval_rng);
      }
      record.eval_reward = eval_sum / config.eval_episodes;
      if (record.eval_reward > art.best_reward) {
        art.best_reward = record.eval_reward;
        art.best_params = state.theta;
        art.best_step = step;
      }
      record.best_reward = art.best_reward;
      art.evaluations.push_back(record);
    }
  }
  } catch (const NumericError& e) {
    art.failed = true;
    art.failure = "step " + std::to_string(step) + ": " + e.what();
  }
  art.final_params = state.theta;
  return art;
}

std::vector<Eigen::MatrixXd> pool_q_values_all(const SamplePool& pool,
                                               const MlpSpec& spec,
                                               const Eigen::MatrixXd& inputs) {
  if (pool.empty()) throw UsageError("sample pool is empty");
  const auto members = static_cast<Eigen::Index>(pool.size());
  std::vector<Eigen::MatrixXd> out(
      static_cast<std::size_t>(spec.output_dim()),
      Eigen::MatrixXd(members, inputs.cols()));
  for (Eigen::Index i = 0; i < members; ++i) {
    const Eigen::MatrixXd q =
        mlp_forward(spec, pool.at(static_cast<std::size_t>(i)), inputs);
    for (int a = 0; a < spec.output_dim(); ++a) {
      out[static_cast<std::size_t>(a)].row(i) = q.row(a);
    }
  }
  return out;
}

Eigen::MatrixXd pool_q_values(const SamplePool& pool, const MlpSpec& spec,
                              const Eigen::MatrixXd& inputs, int action) {
  if (action < 0 || action >= spec.output_dim()) {
    throw UsageError("action index outside the Q head");
  }
  if (pool.empty()) throw UsageError("sample pool is empty");
  const auto members = static_cast<Eigen::Index>(pool.size());
  Eigen::MatrixXd out(members, inputs.cols());
  for (Eigen::Index i = 0; i < members; ++i) {
    out.row(i) =
        mlp_forward(spec, pool.at(static_cast<std::size_t>(i)), inputs).row(action);
  }
  return out;
}

}  // namespace lktd

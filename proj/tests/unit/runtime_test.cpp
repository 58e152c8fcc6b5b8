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


#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "lktd/error.hpp"
#include "lktd/runtime.hpp"
#include "test_util.hpp"

namespace lktd {
namespace {

TEST(EpsilonGreedy, ArgmaxWhenGreedy) {
  Rng rng(1);
  EXPECT_EQ(epsilon_greedy(Eigen::Vector3d(1.0, 3.0, 2.0), 0.0, rng), 1);
  EXPECT_THROW(epsilon_greedy(Eigen::VectorXd(0), 0.0, rng), UsageError);
}

TEST(EpsilonGreedy, UniformWhenFullyRandom) {
  Rng rng(2);
  std::vector<long> counts(4, 0);
  for (int i = 0; i < 100000; ++i) {
    ++counts[static_cast<std::size_t>(
        epsilon_greedy(Eigen::Vector4d(5.0, 1.0, 0.0, -2.0), 1.0, rng))];
  }
  EXPECT_GT(testing::chi_square_pvalue(testing::chi_square_uniform(counts), 3.0), 0.01);
}

TEST(EpsilonGreedy, TiesSplitEvenly) {
  Rng rng(3);
  std::vector<long> counts(2, 0);
  for (int i = 0; i < 100000; ++i) {
    ++counts[static_cast<std::size_t>(epsilon_greedy(Eigen::Vector2d(2.0, 2.0), 0.0, rng))];
  }
  EXPECT_GT(testing::chi_square_pvalue(testing::chi_square_uniform(counts), 1.0), 0.01);
  EXPECT_NEAR(counts[0] / 100000.0, 0.5, 0.01);
}

TEST(Exploration, LinearSchedule) {
  RunConfig c;
  c.total_steps = 1000;
  c.exploration_fraction = 0.1;
  c.exploration_final = 0.02;
  EXPECT_EQ(exploration_schedule(c, 0), 1.0);
  EXPECT_DOUBLE_EQ(exploration_schedule(c, 100), 0.02);
  EXPECT_DOUBLE_EQ(exploration_schedule(c, 50), 0.51);
  EXPECT_DOUBLE_EQ(exploration_schedule(c, 900), 0.02);
}

TEST(Pool, RingKeepsTheLastMembers) {
  SamplePool pool(3);
  for (int i = 0; i < 7; ++i) pool.push(ParamVector::Constant(1, i));
  ASSERT_EQ(pool.size(), 3u);
  EXPECT_EQ(pool.at(0)[0], 4.0);
  EXPECT_EQ(pool.at(2)[0], 6.0);
  const auto members = pool.members();
  EXPECT_EQ(members[1][0], 5.0);
}

RunConfig small_indoor(std::int64_t steps) {
  RunConfig c;
  c.env = EnvSpec::make(EnvKind::kIndoorEscape);
  c.hidden = {8, 8};
  c.total_steps = steps;
  c.learning_starts = 100;
  c.batch_size = 16;
  c.pool_size = 25;
  c.eval_checkpoints = 4;
  c.eval_episodes = 1;
  c.env.max_steps = 200;
  c.seed = 17;
  return c;
}

TEST(Train, ZeroStepsGivesEmptyArtifacts) {
  const RunArtifacts art = train(small_indoor(0));
  EXPECT_TRUE(art.pool.empty());
  EXPECT_TRUE(art.evaluations.empty());
  EXPECT_TRUE(art.episode_rewards.empty());
  EXPECT_EQ(art.updates, 0);
  EXPECT_FALSE(art.failed);
}

TEST(Train, SeededRunsAreIdentical) {
  for (Engine e : {Engine::kLktd, Engine::kSghmc, Engine::kAdamDqn}) {
    RunConfig c = small_indoor(1500);
    c.engine = e;
    if (e == Engine::kAdamDqn) c.sampler.mode = MeasurementMode::kTdTarget;
    const RunArtifacts a = train(c);
    const RunArtifacts b = train(c);
    ASSERT_GT(a.updates, 0);
    EXPECT_EQ(a.final_params, b.final_params) << to_string(e);
    EXPECT_EQ(a.episode_rewards, b.episode_rewards);
    ASSERT_EQ(a.evaluations.size(), b.evaluations.size());
    for (std::size_t i = 0; i < a.evaluations.size(); ++i) {
      EXPECT_EQ(a.evaluations[i].eval_reward, b.evaluations[i].eval_reward);
    }
    c.seed += 1;
    EXPECT_NE(train(c).final_params, a.final_params);
  }
}

TEST(Train, TriggersAndPool) {
  RunConfig c = small_indoor(200);
  c.learning_starts = 45;
  c.train_freq = 10;
  c.gradient_steps = 2;
  c.pool_size = 1000;
  c.env.max_steps = 10000;
  c.exploration_final = 1.0;
  const RunArtifacts art = train(c);
  // Buffer size after step s is s - 1 or s: triggers at 50, 60, ..., 200.
  EXPECT_EQ(art.updates, 32);
  EXPECT_EQ(art.pool.size(), 32u);
  EXPECT_EQ(art.update_ms.size(), 32u);
  EXPECT_EQ(art.pool.at(31), art.final_params);

  c.pool_size = 5;
  EXPECT_EQ(train(c).pool.size(), 5u);
}

TEST(Train, CheckpointsAndBestModel) {
  RunConfig c = small_indoor(1000);
  c.eval_checkpoints = 10;
  const RunArtifacts art = train(c);
  ASSERT_EQ(art.evaluations.size(), 10u);
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < art.evaluations.size(); ++i) {
    EXPECT_EQ(art.evaluations[i].step, static_cast<std::int64_t>(100 * (i + 1)));
    best = std::max(best, art.evaluations[i].eval_reward);
    EXPECT_EQ(art.evaluations[i].best_reward, best);
  }
  EXPECT_EQ(art.best_reward, best);
}

TEST(Train, OnPolicyUsesFreshBatches) {
  RunConfig c = small_indoor(400);
  c.on_policy = true;
  c.train_freq = 20;
  c.batch_size = 20;
  const RunArtifacts art = train(c);
  EXPECT_GT(art.updates, 10);
  EXPECT_LE(art.updates, 20);
}

TEST(Train, DivergenceIsFlagged) {
  RunConfig c = small_indoor(500);
  c.sampler.eps0 = 1e6;
  const RunArtifacts art = train(c);
  EXPECT_TRUE(art.failed);
  EXPECT_FALSE(art.failure.empty());
}

TEST(PoolValues, SingleAndRepeatedMembers) {
  const MlpSpec spec{{2, 4, 4}};
  Rng rng(5);
  const ParamVector theta = testing::normal_vector(rng, spec.param_count());
  const Eigen::MatrixXd inputs = testing::normal_matrix(rng, 2, 6);
  SamplePool pool(10);
  pool.push(theta);
  const Eigen::MatrixXd q = pool_q_values(pool, spec, inputs, 2);
  ASSERT_EQ(q.rows(), 1);
  EXPECT_EQ(q.row(0), mlp_forward(spec, theta, inputs).row(2));
  for (int i = 0; i < 3; ++i) pool.push(theta);
  const Eigen::MatrixXd q4 = pool_q_values(pool, spec, inputs, 2);
  for (int i = 1; i < 4; ++i) EXPECT_EQ(q4.row(i), q4.row(0));
  EXPECT_THROW(pool_q_values(SamplePool(3), spec, inputs, 0), UsageError);
}

TEST(PoolFile, RoundTrip) {
  RunConfig c = small_indoor(600);
  const RunArtifacts art = train(c);
  ASSERT_FALSE(art.pool.empty());
  const auto path = std::filesystem::temp_directory_path() / "lktd_pool_test.bin";
  write_pool(path.string(), art.pool, art.network);
  const SamplePool back = read_pool(path.string(), art.network);
  ASSERT_EQ(back.size(), art.pool.size());
  const Eigen::MatrixXd inputs = Eigen::MatrixXd::Random(2, 5);
  EXPECT_EQ(pool_q_values(back, art.network, inputs, 1),
            pool_q_values(art.pool, art.network, inputs, 1));
  EXPECT_THROW(read_pool(path.string(), MlpSpec{{2, 9, 4}}), IoError);
  {
    std::ofstream junk(path, std::ios::binary | std::ios::trunc);
    junk << "not a pool";
  }
  EXPECT_THROW(read_pool(path.string(), art.network), IoError);
  std::filesystem::remove(path);
}

TEST(RunConfig, Validation) {
  RunConfig c;
  EXPECT_NO_THROW(c.validate());
  c.train_freq = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = RunConfig{};
  c.exploration_final = 1.5;
  EXPECT_THROW(c.validate(), ConfigError);
  c = RunConfig{};
  c.engine = Engine::kAdamDqn;
  EXPECT_THROW(c.validate(), ConfigError);
  c.sampler.mode = MeasurementMode::kTdTarget;
  EXPECT_NO_THROW(c.validate());
}

}  // namespace
}  // namespace lktd

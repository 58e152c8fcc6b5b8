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


// Reference values: the indoor-escape Q-table of the eps-greedy optimal
// policy (dynamic programming or Monte Carlo rollouts) and the closed-form
// tempered posterior of linear-Gaussian problems.

#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <iosfwd>
#include <string>

#include "lktd/random.hpp"

namespace lktd {

enum class OracleMethod { kDp, kMonteCarlo };

/// 100 x 4 table indexed by state(x, y) = 10 x + y and the indoor action.
/// The goal row is all zeros (absorbing).
struct QTable {
  Eigen::MatrixXd q;
  Eigen::MatrixXd stderr_q;
  Eigen::MatrixXi visits;
  double eps_explore = 0.01;
  double gamma = 1.0;
  OracleMethod method = OracleMethod::kDp;

  static int state(int x, int y) { return 10 * x + y; }
  double at(int x, int y, int action) const { return q(state(x, y), action); }
};

/// Fixed point of Q(s, a) = -1 + gamma V(s'), V = (1 - eps) max Q + eps mean Q
/// and V(goal) = 0, iterated until the sup-norm change is below `tolerance`.
QTable grid_q_star_dp(double eps_explore, double gamma,
                      double tolerance = 1e-10,
                      std::int64_t max_iterations = 10'000'000);

struct MonteCarloOptions {
  std::int64_t episodes = 1'000'000;
  /// When false the reward is exactly -1 per step.
  bool reward_noise = true;
  double reward_sd = 0.1;
  /// Rollouts are cut after this many steps.
  int max_steps = 100000;
};

/// Exploring starts (uniform non-goal state and action), then the eps-greedy
/// policy over the shortest-path actions {N, E}. Every first visit of a
/// pair along an episode contributes its return.
QTable grid_q_star_mc(double eps_explore, double gamma,
                      const MonteCarloOptions& options, Rng& rng);

/// CSV with columns x, y, action, q, stderr.
void write_qtable_csv(std::ostream& out, const QTable& table);
void write_qtable_csv(const std::string& path, const QTable& table);
QTable read_qtable_csv(const std::string& path);

/// Linear-Gaussian model y = A theta + noise(sigma2) with prior
/// N(prior_mean, prior_cov), likelihood raised to pseudo_pop / n where n is
/// the number of rows of A.
struct ConjugateSpec {
  Eigen::MatrixXd design;
  double sigma2 = 1.0;
  Eigen::VectorXd prior_mean;
  Eigen::MatrixXd prior_cov;
  double pseudo_pop = 1.0;
  /// Parameter used to simulate observations; informational.
  Eigen::VectorXd theta_true;
};

struct GaussianPosterior {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

GaussianPosterior conjugate_posterior(const ConjugateSpec& spec,
                                      const Eigen::VectorXd& observations);

}  // namespace lktd

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

#include <Eigen/Core>

#include <cstdint>
#include <vector>

namespace lktd {

/// One (s, a, r, s', a', done) tuple. `next_action` is the action actually
/// executed at s' and is ignored when `terminal` is set.
struct Transition {
  Eigen::VectorXd state;
  int action = 0;
  double reward = 0.0;
  Eigen::VectorXd next_state;
  int next_action = 0;
  bool terminal = false;
};

/// n transitions stored column-wise, ready to be fed to a network.
struct TransitionBatch {
  Eigen::MatrixXd states;       // obs_dim x n
  std::vector<int> actions;
  Eigen::VectorXd rewards;
  Eigen::MatrixXd next_states;  // obs_dim x n
  std::vector<int> next_actions;
  std::vector<std::uint8_t> terminals;

  Eigen::Index size() const { return rewards.size(); }

  static TransitionBatch from(const std::vector<Transition>& transitions);
};

inline TransitionBatch TransitionBatch::from(
    const std::vector<Transition>& transitions) {
  TransitionBatch batch;
  const auto n = static_cast<Eigen::Index>(transitions.size());
  const Eigen::Index dim = n == 0 ? 0 : transitions.front().state.size();
  batch.states.resize(dim, n);
  batch.next_states.resize(dim, n);
  batch.rewards.resize(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const Transition& t = transitions[static_cast<std::size_t>(j)];
    batch.states.col(j) = t.state;
    batch.next_states.col(j) = t.next_state;
    batch.rewards[j] = t.reward;
    batch.actions.push_back(t.action);
    batch.next_actions.push_back(t.next_action);
    batch.terminals.push_back(t.terminal ? 1 : 0);
  }
  return batch;
}

}  // namespace lktd

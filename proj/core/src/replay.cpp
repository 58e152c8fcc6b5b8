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


#include "lktd/replay.hpp"

#include <random>
#include <string>

#include "lktd/error.hpp"

namespace lktd {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  detail::require(capacity >= 1, "replay capacity must be >= 1");
  data_.reserve(capacity);
  stamps_.reserve(capacity);
}

void ReplayBuffer::push(const Transition& transition, std::int64_t timestamp) {
  if (!stamps_.empty() && timestamp < stamps_[physical(size() - 1)]) {
    throw UsageError("replay timestamps must be non-decreasing");
  }
  if (data_.size() < capacity_) {
    data_.push_back(transition);
    stamps_.push_back(timestamp);
  } else {
    data_[head_] = transition;
    stamps_[head_] = timestamp;
    head_ = (head_ + 1) % capacity_;
  }
  ++total_pushed_;
}

void ReplayBuffer::push(const std::vector<Transition>& transitions,
                        std::int64_t timestamp) {
  for (const Transition& t : transitions) push(t, timestamp);
}

const Transition& ReplayBuffer::at(std::size_t i) const {
  if (i >= size()) throw UsageError("replay index out of range");
  return data_[physical(i)];
}

std::int64_t ReplayBuffer::timestamp(std::size_t i) const {
  if (i >= size()) throw UsageError("replay index out of range");
  return stamps_[physical(i)];
}

TransitionBatch ReplayBuffer::sample(std::size_t n, Rng& rng) const {
  if (empty()) {
    throw InsufficientDataError("cannot sample " + std::to_string(n) +
                                " transitions from an empty replay buffer");
  }
  std::uniform_int_distribution<std::size_t> pick(0, size() - 1);
  const auto count = static_cast<Eigen::Index>(n);
  const Eigen::Index dim = data_.front().state.size();
  TransitionBatch batch;
  batch.states.resize(dim, count);
  batch.next_states.resize(dim, count);
  batch.rewards.resize(count);
  batch.actions.resize(n);
  batch.next_actions.resize(n);
  batch.terminals.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const Transition& t = data_[pick(rng)];
    const auto col = static_cast<Eigen::Index>(j);
    batch.states.col(col) = t.state;
    batch.next_states.col(col) = t.next_state;
    batch.rewards[col] = t.reward;
    batch.actions[j] = t.action;
    batch.next_actions[j] = t.next_action;
    batch.terminals[j] = t.terminal ? 1 : 0;
  }
  return batch;
}

}  // namespace lktd

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
#include <vector>

#include "lktd/random.hpp"
#include "lktd/transition.hpp"

namespace lktd {

/// FIFO transition store of fixed capacity. Each entry carries the time
/// step that generated it; sampling is uniform with replacement.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(const Transition& transition, std::int64_t timestamp);
  void push(const std::vector<Transition>& transitions, std::int64_t timestamp);

  std::size_t size() const { return data_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return data_.empty(); }
  std::uint64_t total_pushed() const { return total_pushed_; }

  /// i-th oldest entry, 0 <= i < size().
  const Transition& at(std::size_t i) const;
  std::int64_t timestamp(std::size_t i) const;

  /// n uniform draws with replacement. Throws InsufficientDataError on an
  /// empty buffer.
  TransitionBatch sample(std::size_t n, Rng& rng) const;

 private:
  std::size_t physical(std::size_t i) const { return (head_ + i) % capacity_; }

  std::size_t capacity_;
  std::size_t head_ = 0;
  std::uint64_t total_pushed_ = 0;
  std::vector<Transition> data_;
  std::vector<std::int64_t> stamps_;
};

}  // namespace lktd

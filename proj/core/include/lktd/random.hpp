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
#include <random>

namespace lktd {

using Rng = std::mt19937_64;

/// Independent generator for one consumer of a run, derived from the run
/// seed and a purpose tag so that adding draws in one consumer never shifts
/// another consumer's stream.
inline Rng make_stream(std::uint64_t seed, std::uint64_t purpose) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(purpose),
                    static_cast<std::uint32_t>(purpose >> 32), 0x1c7du};
  return Rng(seq);
}

enum class StreamPurpose : std::uint64_t {
  kInit = 1,
  kEnv = 2,
  kExploration = 3,
  kSampler = 4,
  kBuffer = 5,
  kEval = 6,
};

inline Rng make_stream(std::uint64_t seed, StreamPurpose purpose) {
  return make_stream(seed, static_cast<std::uint64_t>(purpose));
}

/// Fills `out` with i.i.d. N(0, scale^2) draws. All samplers draw their
/// Gaussian noise through this function, in coordinate order, so reference
/// implementations can replay a trajectory from the same seed.
template <typename Derived>
void fill_normal(Rng& rng, Eigen::DenseBase<Derived>& out, double scale) {
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    out.derived().coeffRef(i) = scale * normal(rng);
  }
}

}  // namespace lktd

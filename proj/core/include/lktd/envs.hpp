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


// Benchmark environments behind one stepping contract: the 10 x 10 indoor
// escape grid, cart-pole and mountain-car with the usual classic-control
// constants.

#pragma once

#include <Eigen/Core>

#include <string_view>

#include "lktd/random.hpp"

namespace lktd {

enum class EnvKind { kIndoorEscape, kCartPole, kMountainCar };

std::string_view to_string(EnvKind kind);
EnvKind parse_env_kind(std::string_view text);

struct EnvSpec {
  EnvKind kind = EnvKind::kIndoorEscape;
  /// Episodes are truncated (not terminated) after this many steps.
  int max_steps = 2000;
  /// Indoor only: the per-step reward is N(-1, reward_sd^2).
  double reward_sd = 0.1;

  /// Defaults for a kind: 2000 / 500 / 200 steps.
  static EnvSpec make(EnvKind kind);
  void validate() const;
  int num_actions() const;
  int obs_dim() const;

  friend bool operator==(const EnvSpec&, const EnvSpec&) = default;
};

/// Indoor actions and grid geometry.
inline constexpr int kGridSize = 10;
enum IndoorAction : int { kNorth = 0, kEast = 1, kSouth = 2, kWest = 3 };

/// "N", "E", "S", "W" as used in the CSV artifacts.
std::string_view indoor_action_name(int action);
int parse_indoor_action(std::string_view name);

struct EnvState {
  /// indoor: (x, y) cell; cart-pole: (x, x_dot, theta, theta_dot);
  /// mountain-car: (position, velocity).
  Eigen::VectorXd observation;
  int steps = 0;
  bool terminal = false;
  bool truncated = false;

  bool done() const { return terminal || truncated; }
};

struct StepResult {
  EnvState state;
  double reward = 0.0;
  /// True termination; a truncated episode end leaves this false.
  bool terminal = false;
};

EnvState env_reset(const EnvSpec& spec, Rng& rng);
StepResult env_step(const EnvSpec& spec, const EnvState& state, int action,
                    Rng& rng);

/// Network input for an observation. The indoor grid cell is scaled to
/// [0, 1]^2, the classic-control observations pass through unchanged.
Eigen::VectorXd network_input(const EnvSpec& spec,
                              const Eigen::VectorXd& observation);

/// Deterministic indoor move: the neighbouring cell, or the same cell when
/// the move would leave the grid.
Eigen::Vector2i indoor_move(int x, int y, int action);

}  // namespace lktd

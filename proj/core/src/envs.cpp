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


#include "lktd/envs.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "lktd/error.hpp"

namespace lktd {
namespace {

namespace cartpole {
constexpr double kGravity = 9.8;
constexpr double kMassCart = 1.0;
constexpr double kMassPole = 0.1;
constexpr double kTotalMass = kMassCart + kMassPole;
constexpr double kHalfLength = 0.5;
constexpr double kPoleMassLength = kMassPole * kHalfLength;
constexpr double kForce = 10.0;
constexpr double kTau = 0.02;
constexpr double kThetaLimit = 12.0 * 2.0 * std::numbers::pi / 360.0;
constexpr double kXLimit = 2.4;
}  // namespace cartpole

namespace mountain {
constexpr double kMinPosition = -1.2;
constexpr double kMaxPosition = 0.6;
constexpr double kMaxSpeed = 0.07;
constexpr double kGoalPosition = 0.5;
constexpr double kForce = 0.001;
constexpr double kGravity = 0.0025;
}  // namespace mountain

}  // namespace

std::string_view indoor_action_name(int action) {
  static constexpr std::string_view kNames[] = {"N", "E", "S", "W"};
  detail::require(action >= 0 && action < 4, "indoor action outside 0..3");
  return kNames[action];
}

int parse_indoor_action(std::string_view name) {
  for (int a = 0; a < 4; ++a) {
    if (indoor_action_name(a) == name) return a;
  }
  throw ConfigError("unknown indoor action '" + std::string(name) + "'");
}

std::string_view to_string(EnvKind kind) {
  switch (kind) {
    case EnvKind::kIndoorEscape: return "indoor_escape";
    case EnvKind::kCartPole: return "cartpole";
    case EnvKind::kMountainCar: return "mountain_car";
  }
  return "?";
}

EnvKind parse_env_kind(std::string_view text) {
  if (text == "indoor_escape" || text == "indoor") return EnvKind::kIndoorEscape;
  if (text == "cartpole") return EnvKind::kCartPole;
  if (text == "mountain_car") return EnvKind::kMountainCar;
  throw ConfigError("unknown environment '" + std::string(text) + "'");
}

EnvSpec EnvSpec::make(EnvKind kind) {
  EnvSpec spec;
  spec.kind = kind;
  switch (kind) {
    case EnvKind::kIndoorEscape: spec.max_steps = 2000; break;
    case EnvKind::kCartPole: spec.max_steps = 500; break;
    case EnvKind::kMountainCar: spec.max_steps = 200; break;
  }
  return spec;
}

void EnvSpec::validate() const {
  detail::require(max_steps >= 1, "env.max_steps must be >= 1");
  detail::require(reward_sd >= 0.0, "env.reward_sd must be >= 0");
}

int EnvSpec::num_actions() const {
  switch (kind) {
    case EnvKind::kIndoorEscape: return 4;
    case EnvKind::kCartPole: return 2;
    case EnvKind::kMountainCar: return 3;
  }
  return 0;
}

int EnvSpec::obs_dim() const {
  switch (kind) {
    case EnvKind::kIndoorEscape: return 2;
    case EnvKind::kCartPole: return 4;
    case EnvKind::kMountainCar: return 2;
  }
  return 0;
}

Eigen::Vector2i indoor_move(int x, int y, int action) {
  switch (action) {
    case kNorth: y = std::min(y + 1, kGridSize - 1); break;
    case kEast: x = std::min(x + 1, kGridSize - 1); break;
    case kSouth: y = std::max(y - 1, 0); break;
    case kWest: x = std::max(x - 1, 0); break;
    default: throw UsageError("indoor action must be in {0, 1, 2, 3}");
  }
  return {x, y};
}

EnvState env_reset(const EnvSpec& spec, Rng& rng) {
  EnvState state;
  switch (spec.kind) {
    case EnvKind::kIndoorEscape:
      state.observation = Eigen::Vector2d(0.0, 0.0);
      break;
    case EnvKind::kCartPole: {
      std::uniform_real_distribution<double> u(-0.05, 0.05);
      state.observation.resize(4);
      for (Eigen::Index i = 0; i < 4; ++i) state.observation[i] = u(rng);
      break;
    }
    case EnvKind::kMountainCar: {
      std::uniform_real_distribution<double> u(-0.6, -0.4);
      const double position = u(rng);
      state.observation = Eigen::Vector2d(position, 0.0);
      break;
    }
  }
  return state;
}

StepResult env_step(const EnvSpec& spec, const EnvState& state, int action,
                    Rng& rng) {
  if (state.done()) throw UsageError("cannot step a finished episode");
  if (action < 0 || action >= spec.num_actions()) {
    throw UsageError("action " + std::to_string(action) +
                     " outside the action set of " +
                     std::string(to_string(spec.kind)));
  }
  StepResult result;
  EnvState& next = result.state;
  next.steps = state.steps + 1;
  switch (spec.kind) {
    case EnvKind::kIndoorEscape: {
      const Eigen::Vector2i cell =
          indoor_move(static_cast<int>(state.observation[0]),
                      static_cast<int>(state.observation[1]), action);
      next.observation = cell.cast<double>();
      std::normal_distribution<double> reward(-1.0, spec.reward_sd);
      result.reward = spec.reward_sd > 0.0 ? reward(rng) : -1.0;
      result.terminal = cell == Eigen::Vector2i(kGridSize - 1, kGridSize - 1);
      break;
    }
    case EnvKind::kCartPole: {
      using namespace cartpole;
      const double x = state.observation[0];
      const double x_dot = state.observation[1];
      const double theta = state.observation[2];
      const double theta_dot = state.observation[3];
      const double force = action == 1 ? kForce : -kForce;
      const double cos_t = std::cos(theta);
      const double sin_t = std::sin(theta);
      const double temp =
          (force + kPoleMassLength * theta_dot * theta_dot * sin_t) / kTotalMass;
      const double theta_acc =
          (kGravity * sin_t - cos_t * temp) /
          (kHalfLength * (4.0 / 3.0 - kMassPole * cos_t * cos_t / kTotalMass));
      const double x_acc = temp - kPoleMassLength * theta_acc * cos_t / kTotalMass;
      next.observation.resize(4);
      next.observation << x + kTau * x_dot, x_dot + kTau * x_acc,
          theta + kTau * theta_dot, theta_dot + kTau * theta_acc;
      result.reward = 1.0;
      result.terminal = std::abs(next.observation[0]) > kXLimit ||
                        std::abs(next.observation[2]) > kThetaLimit;
      break;
    }
    case EnvKind::kMountainCar: {
      using namespace mountain;
      double position = state.observation[0];
      double velocity = state.observation[1];
      velocity += (action - 1) * kForce + std::cos(3.0 * position) * (-kGravity);
      velocity = std::clamp(velocity, -kMaxSpeed, kMaxSpeed);
      position += velocity;
      position = std::clamp(position, kMinPosition, kMaxPosition);
      if (position == kMinPosition && velocity < 0.0) velocity = 0.0;
      next.observation = Eigen::Vector2d(position, velocity);
      result.reward = -1.0;
      result.terminal = position >= kGoalPosition;
      break;
    }
  }
  next.terminal = result.terminal;
  next.truncated = !result.terminal && next.steps >= spec.max_steps;
  return result;
}

Eigen::VectorXd network_input(const EnvSpec& spec,
                              const Eigen::VectorXd& observation) {
  if (spec.kind == EnvKind::kIndoorEscape) {
    return observation / static_cast<double>(kGridSize - 1);
  }
  return observation;
}

}  // namespace lktd

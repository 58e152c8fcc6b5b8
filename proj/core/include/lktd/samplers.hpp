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
#include <functional>
#include <string_view>

#include "lktd/approximator.hpp"
#include "lktd/random.hpp"
#include "lktd/statespace.hpp"

namespace lktd {

enum class Engine { kLktd, kSgld, kSghmc, kKova, kAdamDqn };

std::string_view to_string(Engine engine);
Engine parse_engine(std::string_view text);

enum class Decay { kConstant, kPolynomial };

/// KOVA noise model: W_t = w_scale I, Gamma_t = gamma_scale I (a negative
/// gamma_scale means "use sigma2"), initial covariance init_var I.
struct KovaConfig {
  double w_scale = 1e-4;
  double gamma_scale = -1.0;
  double learning_rate = 1.0;
  double init_var = 1.0;

  friend bool operator==(const KovaConfig&, const KovaConfig&) = default;
};

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  friend bool operator==(const AdamConfig&, const AdamConfig&) = default;
};

struct SamplerConfig {
  double eps0 = 1e-5;
  Decay decay = Decay::kConstant;
  double decay_power = 0.5;
  double pseudo_pop = 10000.0;
  double alpha = 0.9;
  double sigma2 = 0.01;
  int inner_steps = 5;
  MeasurementMode mode = MeasurementMode::kQResidual;
  Bootstrap bootstrap = Bootstrap::kNextAction;
  double gamma = 1.0;
  double momentum_damping = 0.1;
  MixturePrior prior;
  KovaConfig kova;
  AdamConfig adam;

  void validate(Engine engine) const;
  NoiseSpec noise(Eigen::Index batch_n) const {
    return {sigma2, alpha, pseudo_pop, batch_n};
  }

  friend bool operator==(const SamplerConfig&, const SamplerConfig&) = default;
};

/// Refuses dense covariances beyond this many parameters.
inline constexpr Eigen::Index kKovaMaxParams = 20000;

struct SamplerState {
  Engine engine = Engine::kLktd;
  ParamVector theta;
  Eigen::VectorXd momentum;     // SGHMC
  Eigen::MatrixXd covariance;   // KOVA
  Eigen::VectorXd adam_m;       // Adam first moment
  Eigen::VectorXd adam_v;       // Adam second moment
  /// Gradient evaluations so far; the learning-rate schedule is indexed by
  /// step + 1.
  std::int64_t step = 0;

  static SamplerState create(Engine engine, ParamVector theta,
                             const SamplerConfig& config);
};

/// eps0 for constant decay, eps0 * k^(-decay_power) for polynomial decay.
double lr_schedule(const SamplerConfig& config, std::int64_t k);

/// One LKTD time step: xi is reset to the model target (r, or y in
/// TD-target mode), then `inner_steps` forecast/analysis rounds run on
/// (theta, xi). Per round the noise is drawn in this order: forecast noise
/// for theta (p values), forecast noise for xi (n values), analysis
/// perturbation v (n values).
void lktd_step(SamplerState& state, MeasurementModel& model,
               const SamplerConfig& config, Rng& rng);

/// Same as lktd_step but also returns the final latent xi.
AugmentedState lktd_step_augmented(SamplerState& state,
                                   MeasurementModel& model,
                                   const SamplerConfig& config, Rng& rng);

using LogDensityGradient =
    std::function<Eigen::VectorXd(const Eigen::VectorXd& phi)>;

/// Single forecast/analysis step on a generic state phi whose last n
/// coordinates are observed through r = H phi + noise, with B = eps I and
/// R = 2 sigma^2 I. `grad_log_prior` is the gradient of log pi(phi) and
/// `config.pseudo_pop / n` the tempering. Noise order: forecast (all of
/// phi), then v (n values). Uses lr_schedule(config, 1).
Eigen::VectorXd prototype_step(const Eigen::VectorXd& phi,
                               const LogDensityGradient& grad_log_prior,
                               const Eigen::VectorXd& observations,
                               const SamplerConfig& config, Rng& rng);

/// `inner_steps` SGLD updates on the tempered posterior.
void sgld_step(SamplerState& state, MeasurementModel& model,
               const SamplerConfig& config, Rng& rng);

/// `inner_steps` SGHMC updates; the momentum starts from zero on each call.
void sghmc_step(SamplerState& state, MeasurementModel& model,
                const SamplerConfig& config, Rng& rng);

/// Extended-Kalman update of (mean, covariance); the mean lives in theta.
void kova_step(SamplerState& state, MeasurementModel& model,
               const SamplerConfig& config);

/// Adam step on 0.5 * mean (target - h)^2; no prior, no noise.
void adam_dqn_step(SamplerState& state, MeasurementModel& model,
                   const SamplerConfig& config);

/// Engine dispatch on state.engine.
void sampler_step(SamplerState& state, MeasurementModel& model,
                  const SamplerConfig& config, Rng& rng);

}  // namespace lktd

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

// Augmented state-space model used by the Kalman-style samplers.
//
// The network parameters theta are paired with n latent pseudo-observations
// xi ~ N(h(x; theta), alpha sigma^2 I). The measurement operator selects xi,
// so the Kalman gain is block structured: zero on theta, and the scalar
// c = eps / (eps + 2 (1 - alpha) sigma^2) times the identity on xi. Nothing
// here ever materializes a p x p or (p + n) x (p + n) matrix.

#pragma once

#include <Eigen/Core>

#include <string_view>

#include "lktd/approximator.hpp"
#include "lktd/transition.hpp"

namespace lktd {

enum class MeasurementMode { kQResidual, kVResidual, kTdTarget };

/// How the TD-target mode forms Q_target(s', .): the action executed at s'
/// (SARSA-style) or the greedy maximum (Q-learning-style).
enum class Bootstrap { kNextAction, kMax };

std::string_view to_string(MeasurementMode mode);
MeasurementMode parse_measurement_mode(std::string_view text);
std::string_view to_string(Bootstrap bootstrap);
Bootstrap parse_bootstrap(std::string_view text);

struct NoiseSpec {
  double sigma2 = 0.01;
  double alpha = 0.9;
  double pseudo_pop = 10000.0;
  Eigen::Index batch_n = 100;

  void validate() const;
  /// N / n, the factor the likelihood is raised to.
  double tempering() const { return pseudo_pop / static_cast<double>(batch_n); }
};

struct AugmentedState {
  ParamVector theta;
  Eigen::VectorXd xi;
};

struct AugmentedGradient {
  ParamVector theta;
  Eigen::VectorXd xi;
};

/// Differentiable measurement map theta -> h(x; theta) for one batch, plus
/// the observed vector the latent xi is anchored to.
class MeasurementModel {
 public:
  virtual ~MeasurementModel() = default;

  virtual Eigen::Index param_dim() const = 0;
  virtual Eigen::Index size() const = 0;
  /// r in the residual modes, y = r + gamma Q_target(s', .) in TD-target mode.
  virtual const Eigen::VectorXd& target() const = 0;
  /// Evaluates h at theta and keeps what the reverse passes need.
  virtual const Eigen::VectorXd& evaluate(const ParamVector& theta) = 0;
  /// grad_theta h * cotangent at the last evaluated theta.
  virtual ParamVector vjp(const Eigen::VectorXd& cotangent) const = 0;
  /// p x n matrix grad_theta h at the last evaluated theta.
  virtual Eigen::MatrixXd jacobian() const = 0;
};

/// Bellman-residual or TD-target measurement over a network Q_theta / V_theta.
class BellmanMeasurement final : public MeasurementModel {
 public:
  /// `target_params` is required in TD-target mode and ignored otherwise;
  /// no gradient flows through it.
  BellmanMeasurement(MeasurementMode mode, const MlpSpec& spec,
                     const TransitionBatch& batch, double gamma,
                     const ParamVector* target_params = nullptr,
                     Bootstrap bootstrap = Bootstrap::kNextAction);

  Eigen::Index param_dim() const override { return param_dim_; }
  Eigen::Index size() const override { return n_; }
  const Eigen::VectorXd& target() const override { return target_; }
  const Eigen::VectorXd& evaluate(const ParamVector& theta) override;
  ParamVector vjp(const Eigen::VectorXd& cotangent) const override;
  Eigen::MatrixXd jacobian() const override;

 private:
  Eigen::MatrixXd output_cotangent(const Eigen::VectorXd& cotangent) const;

  MeasurementMode mode_;
  Eigen::Index n_;
  Eigen::Index param_dim_;
  MlpTape tape_;
  Eigen::MatrixXd inputs_;
  std::vector<int> actions_;
  std::vector<int> next_actions_;
  // gamma on non-terminal transitions, 0 on terminal ones.
  Eigen::VectorXd discount_;
  Eigen::VectorXd target_;
  Eigen::VectorXd h_;
};

/// h(theta) = A theta with a fixed observation vector; used by the
/// conjugate-Gaussian validation problems.
class LinearMeasurement final : public MeasurementModel {
 public:
  LinearMeasurement(Eigen::MatrixXd design, Eigen::VectorXd observations);

  Eigen::Index param_dim() const override { return design_.cols(); }
  Eigen::Index size() const override { return design_.rows(); }
  const Eigen::VectorXd& target() const override { return observations_; }
  const Eigen::VectorXd& evaluate(const ParamVector& theta) override;
  ParamVector vjp(const Eigen::VectorXd& cotangent) const override;
  Eigen::MatrixXd jacobian() const override { return design_.transpose(); }

 private:
  Eigen::MatrixXd design_;
  Eigen::VectorXd observations_;
  Eigen::VectorXd h_;
};

struct Measurement {
  Eigen::VectorXd h;
  /// r for the residual modes, y for TD-target mode.
  Eigen::VectorXd target;
};

Measurement h_eval(MeasurementMode mode, const MlpSpec& spec,
                   const ParamVector& params, const TransitionBatch& batch,
                   double gamma, const ParamVector* target_params = nullptr,
                   Bootstrap bootstrap = Bootstrap::kNextAction);

/// Scalar on the xi-block of K = B H^T (H B H^T + R)^{-1} with B = eps I,
/// H = (0, I) and R = 2 (1 - alpha) sigma^2 I.
double kalman_gain_scalar(double epsilon, double alpha, double sigma2);

/// Drift of the forecast step at phi = (theta, xi):
///   theta: grad log pi(theta) + (N/n) / (alpha sigma^2) grad h (xi - h)
///   xi:    -(xi - h) / (alpha sigma^2)
/// The N/n factor sits on the theta-block likelihood coupling only.
AugmentedGradient augmented_grad(const AugmentedState& state,
                                 MeasurementModel& model,
                                 const MixturePrior& prior,
                                 const NoiseSpec& noise);

AugmentedGradient augmented_grad(const AugmentedState& state,
                                 const TransitionBatch& batch,
                                 const MixturePrior& prior,
                                 const NoiseSpec& noise, MeasurementMode mode,
                                 const MlpSpec& spec, double gamma,
                                 const ParamVector* target_params = nullptr);

/// Eigenvalues of Sigma_t = (n/N)(I - K H): n/N on theta (multiplicity p)
/// and (n/N)(1 - c) on xi (multiplicity n).
struct PreconditionerEigs {
  double theta = 0.0;
  double xi = 0.0;
};

PreconditionerEigs preconditioner_eigs(double epsilon, double alpha,
                                       double sigma2, Eigen::Index n,
                                       double pseudo_pop);

/// phi <- phi + K (target - H phi - v). Only xi is written.
void apply_analysis(AugmentedState& state, const Eigen::VectorXd& target,
                    const Eigen::VectorXd& perturbation, double gain);

}  // namespace lktd

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

#include "lktd/statespace.hpp"

#include <cmath>
#include <iostream>
#include <string>

#include "lktd/error.hpp"

namespace lktd {

std::string_view to_string(MeasurementMode mode) {
  switch (mode) {
    case MeasurementMode::kQResidual: return "q_residual";
    case MeasurementMode::kVResidual: return "v_residual";
    case MeasurementMode::kTdTarget: return "td_target";
  }
  return "?";
}

MeasurementMode parse_measurement_mode(std::string_view text) {
  if (text == "q_residual") return MeasurementMode::kQResidual;
  if (text == "v_residual") return MeasurementMode::kVResidual;
  if (text == "td_target") return MeasurementMode::kTdTarget;
  throw ConfigError("unknown measurement mode '" + std::string(text) + "'");
}

std::string_view to_string(Bootstrap bootstrap) {
  return bootstrap == Bootstrap::kMax ? "max" : "next_action";
}

Bootstrap parse_bootstrap(std::string_view text) {
  if (text == "next_action") return Bootstrap::kNextAction;
  if (text == "max") return Bootstrap::kMax;
  throw ConfigError("unknown bootstrap rule '" + std::string(text) + "'");
}

void NoiseSpec::validate() const {
  detail::require(sigma2 > 0.0, "sigma2 must be positive");
  detail::require(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0, 1)");
  detail::require(pseudo_pop > 0.0, "pseudo population must be positive");
  detail::require(batch_n >= 1, "batch size must be at least 1");
  if (static_cast<double>(batch_n) > pseudo_pop) {
    std::cerr << "warning: batch size " << batch_n
              << " exceeds pseudo population " << pseudo_pop << "\n";
  }
}

BellmanMeasurement::BellmanMeasurement(MeasurementMode mode,
                                       const MlpSpec& spec,
                                       const TransitionBatch& batch,
                                       double gamma,
                                       const ParamVector* target_params,
                                       Bootstrap bootstrap)
    : mode_(mode),
      n_(batch.size()),
      param_dim_(spec.param_count()),
      tape_(spec) {
  detail::require(gamma > 0.0 && gamma <= 1.0, "gamma must lie in (0, 1]");
  detail::require(n_ >= 1, "measurement needs a non-empty batch");
  const auto n = static_cast<std::size_t>(n_);
  detail::require(batch.states.cols() == n_ && batch.next_states.cols() == n_ &&
                      batch.actions.size() == n && batch.terminals.size() == n,
                  "transition batch fields have inconsistent lengths");
  detail::require(batch.states.rows() == spec.input_dim(),
                  "state dimension does not match network input");

  const int outputs = spec.output_dim();
  if (mode == MeasurementMode::kVResidual) {
    detail::require(outputs == 1, "v_residual mode needs a scalar value head");
  } else {
    for (int a : batch.actions) {
      detail::require(a >= 0 && a < outputs, "action index outside Q head");
    }
  }
  if (mode == MeasurementMode::kQResidual ||
      (mode == MeasurementMode::kTdTarget &&
       bootstrap == Bootstrap::kNextAction)) {
    detail::require(batch.next_actions.size() == n,
                    "this mode needs next actions in the batch");
    for (std::size_t j = 0; j < n; ++j) {
      if (batch.terminals[j]) continue;
      detail::require(batch.next_actions[j] >= 0 &&
                          batch.next_actions[j] < outputs,
                      "next action index outside Q head");
    }
  }

  actions_ = batch.actions;
  next_actions_ = batch.next_actions;
  discount_.resize(n_);
  for (Eigen::Index j = 0; j < n_; ++j) {
    discount_[j] = batch.terminals[static_cast<std::size_t>(j)] ? 0.0 : gamma;
  }

  if (mode == MeasurementMode::kTdTarget) {
    if (target_params == nullptr) {
      throw ConfigError("td_target mode needs target network parameters");
    }
    inputs_ = batch.states;
    const Eigen::MatrixXd next_q =
        mlp_forward(spec, *target_params, batch.next_states);
    target_ = batch.rewards;
    for (Eigen::Index j = 0; j < n_; ++j) {
      if (discount_[j] == 0.0) continue;
      const double bootstrap_q =
          bootstrap == Bootstrap::kMax
              ? next_q.col(j).maxCoeff()
              : next_q(next_actions_[static_cast<std::size_t>(j)], j);
      target_[j] += discount_[j] * bootstrap_q;
    }
  } else {
    inputs_.resize(batch.states.rows(), 2 * n_);
    inputs_.leftCols(n_) = batch.states;
    inputs_.rightCols(n_) = batch.next_states;
    target_ = batch.rewards;
  }
  if (!target_.allFinite()) {
    throw NumericError("measurement target is not finite");
  }
}

const Eigen::VectorXd& BellmanMeasurement::evaluate(const ParamVector& theta) {
  const Eigen::MatrixXd& out = tape_.forward(theta, inputs_);
  h_.resize(n_);
  for (Eigen::Index j = 0; j < n_; ++j) {
    const auto idx = static_cast<std::size_t>(j);
    switch (mode_) {
      case MeasurementMode::kQResidual: {
        double value = out(actions_[idx], j);
        if (discount_[j] != 0.0) {
          value -= discount_[j] * out(next_actions_[idx], n_ + j);
        }
        h_[j] = value;
        break;
      }
      case MeasurementMode::kVResidual:
        h_[j] = out(0, j) - discount_[j] * out(0, n_ + j);
        break;
      case MeasurementMode::kTdTarget:
        h_[j] = out(actions_[idx], j);
        break;
    }
  }
  return h_;
}

Eigen::MatrixXd BellmanMeasurement::output_cotangent(
    const Eigen::VectorXd& cotangent) const {
  if (cotangent.size() != n_) {
    throw ConfigError("cotangent length does not match batch size");
  }
  const int outputs = tape_.spec().output_dim();
  Eigen::MatrixXd cot = Eigen::MatrixXd::Zero(outputs, inputs_.cols());
  for (Eigen::Index j = 0; j < n_; ++j) {
    const auto idx = static_cast<std::size_t>(j);
    switch (mode_) {
      case MeasurementMode::kQResidual:
        cot(actions_[idx], j) = cotangent[j];
        if (discount_[j] != 0.0) {
          cot(next_actions_[idx], n_ + j) = -discount_[j] * cotangent[j];
        }
        break;
      case MeasurementMode::kVResidual:
        cot(0, j) = cotangent[j];
        cot(0, n_ + j) = -discount_[j] * cotangent[j];
        break;
      case MeasurementMode::kTdTarget:
        cot(actions_[idx], j) = cotangent[j];
        break;
    }
  }
  return cot;
}

ParamVector BellmanMeasurement::vjp(const Eigen::VectorXd& cotangent) const {
  return tape_.backward(output_cotangent(cotangent));
}

Eigen::MatrixXd BellmanMeasurement::jacobian() const {
  const Eigen::MatrixXd per_column =
      tape_.per_sample_backward(output_cotangent(Eigen::VectorXd::Ones(n_)));
  if (mode_ == MeasurementMode::kTdTarget) return per_column;
  return per_column.leftCols(n_) + per_column.rightCols(n_);
}

LinearMeasurement::LinearMeasurement(Eigen::MatrixXd design,
                                     Eigen::VectorXd observations)
    : design_(std::move(design)), observations_(std::move(observations)) {
  detail::require(design_.rows() == observations_.size(),
                  "design rows must match the number of observations");
}

const Eigen::VectorXd& LinearMeasurement::evaluate(const ParamVector& theta) {
  if (theta.size() != design_.cols()) {
    throw ConfigError("parameter length does not match design columns");
  }
  h_.noalias() = design_ * theta;
  return h_;
}

ParamVector LinearMeasurement::vjp(const Eigen::VectorXd& cotangent) const {
  return design_.transpose() * cotangent;
}

Measurement h_eval(MeasurementMode mode, const MlpSpec& spec,
                   const ParamVector& params, const TransitionBatch& batch,
                   double gamma, const ParamVector* target_params,
                   Bootstrap bootstrap) {
  BellmanMeasurement model(mode, spec, batch, gamma, target_params, bootstrap);
  Measurement m;
  m.h = model.evaluate(params);
  m.target = model.target();
  return m;
}

double kalman_gain_scalar(double epsilon, double alpha, double sigma2) {
  detail::require(epsilon > 0.0 && std::isfinite(epsilon),
                  "step size must be positive and finite");
  detail::require(sigma2 > 0.0, "sigma2 must be positive");
  detail::require(alpha > 0.0 && alpha < 1.0,
                  "alpha must lie in (0, 1); alpha >= 1 makes R singular");
  return epsilon / (epsilon + 2.0 * (1.0 - alpha) * sigma2);
}

AugmentedGradient augmented_grad(const AugmentedState& state,
                                 MeasurementModel& model,
                                 const MixturePrior& prior,
                                 const NoiseSpec& noise) {
  if (state.xi.size() != model.size()) {
    throw ConfigError("xi length does not match the batch size");
  }
  const Eigen::VectorXd& h = model.evaluate(state.theta);
  if (!h.allFinite()) {
    throw NumericError("measurement h(x; theta) is not finite");
  }
  const double inv_var = 1.0 / (noise.alpha * noise.sigma2);
  const Eigen::VectorXd residual = state.xi - h;
  AugmentedGradient grad;
  grad.theta = log_prior_grad(prior, state.theta);
  grad.theta += (noise.tempering() * inv_var) * model.vjp(residual);
  grad.xi = -inv_var * residual;
  return grad;
}

AugmentedGradient augmented_grad(const AugmentedState& state,
                                 const TransitionBatch& batch,
                                 const MixturePrior& prior,
                                 const NoiseSpec& noise, MeasurementMode mode,
                                 const MlpSpec& spec, double gamma,
                                 const ParamVector* target_params) {
  BellmanMeasurement model(mode, spec, batch, gamma, target_params);
  return augmented_grad(state, model, prior, noise);
}

PreconditionerEigs preconditioner_eigs(double epsilon, double alpha,
                                       double sigma2, Eigen::Index n,
                                       double pseudo_pop) {
  detail::require(n >= 1, "batch size must be at least 1");
  detail::require(pseudo_pop > 0.0, "pseudo population must be positive");
  const double c = kalman_gain_scalar(epsilon, alpha, sigma2);
  const double ratio = static_cast<double>(n) / pseudo_pop;
  return {ratio, ratio * (1.0 - c)};
}

void apply_analysis(AugmentedState& state, const Eigen::VectorXd& target,
                    const Eigen::VectorXd& perturbation, double gain) {
  state.xi += gain * (target - state.xi - perturbation);
}

}  // namespace lktd

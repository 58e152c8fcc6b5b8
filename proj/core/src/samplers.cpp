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

#include "lktd/samplers.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <string>

#include "lktd/error.hpp"

namespace lktd {
namespace {

void check_finite(const Eigen::VectorXd& v, const char* engine) {
  if (!v.allFinite()) {
    throw NumericError(std::string(engine) +
                       ": non-finite update (step size too large?)");
  }
}

// grad log pi(theta) + (N/n) / sigma^2 * grad h (target - h)
ParamVector posterior_grad(const ParamVector& theta, MeasurementModel& model,
                           const SamplerConfig& config) {
  const Eigen::VectorXd& h = model.evaluate(theta);
  const double scale =
      config.pseudo_pop / static_cast<double>(model.size()) / config.sigma2;
  ParamVector grad = log_prior_grad(config.prior, theta);
  grad += scale * model.vjp(model.target() - h);
  return grad;
}

}  // namespace

std::string_view to_string(Engine engine) {
  switch (engine) {
    case Engine::kLktd: return "lktd";
    case Engine::kSgld: return "sgld";
    case Engine::kSghmc: return "sghmc";
    case Engine::kKova: return "kova";
    case Engine::kAdamDqn: return "dqn";
  }
  return "?";
}

Engine parse_engine(std::string_view text) {
  if (text == "lktd") return Engine::kLktd;
  if (text == "sgld") return Engine::kSgld;
  if (text == "sghmc") return Engine::kSghmc;
  if (text == "kova") return Engine::kKova;
  if (text == "dqn") return Engine::kAdamDqn;
  throw ConfigError("unknown engine '" + std::string(text) + "'");
}

void SamplerConfig::validate(Engine engine) const {
  detail::require(gamma > 0.0 && gamma <= 1.0, "sampler.gamma must lie in (0, 1]");
  switch (engine) {
    case Engine::kLktd:
      detail::require(alpha > 0.0 && alpha < 1.0,
                      "sampler.alpha must lie in (0, 1)");
      [[fallthrough]];
    case Engine::kSgld:
    case Engine::kSghmc:
      detail::require(eps0 > 0.0, "sampler.eps0 must be positive");
      detail::require(inner_steps >= 1, "sampler.inner_steps must be >= 1");
      detail::require(pseudo_pop > 0.0, "sampler.pseudo_pop must be positive");
      detail::require(sigma2 > 0.0, "sampler.sigma2 must be positive");
      if (decay == Decay::kPolynomial) {
        detail::require(decay_power > 0.0 && decay_power < 1.0,
                        "sampler.decay_power must lie in (0, 1)");
      }
      prior.validate();
      if (engine == Engine::kSghmc) {
        detail::require(momentum_damping > 0.0 && momentum_damping <= 1.0,
                        "sampler.momentum_damping must lie in (0, 1]");
      }
      break;
    case Engine::kKova:
      detail::require(kova.w_scale >= 0.0, "kova.w_scale must be >= 0");
      detail::require(kova.learning_rate >= 0.0,
                      "kova.learning_rate must be >= 0");
      detail::require(kova.init_var > 0.0, "kova.init_var must be positive");
      detail::require(kova.gamma_scale > 0.0 || sigma2 > 0.0,
                      "kova observation variance must be positive");
      break;
    case Engine::kAdamDqn:
      detail::require(adam.lr > 0.0, "adam.lr must be positive");
      detail::require(adam.beta1 >= 0.0 && adam.beta1 < 1.0,
                      "adam.beta1 must lie in [0, 1)");
      detail::require(adam.beta2 >= 0.0 && adam.beta2 < 1.0,
                      "adam.beta2 must lie in [0, 1)");
      detail::require(adam.eps > 0.0, "adam.eps must be positive");
      break;
  }
}

SamplerState SamplerState::create(Engine engine, ParamVector theta,
                                  const SamplerConfig& config) {
  SamplerState state;
  state.engine = engine;
  const Eigen::Index p = theta.size();
  state.theta = std::move(theta);
  switch (engine) {
    case Engine::kSghmc:
      state.momentum = Eigen::VectorXd::Zero(p);
      break;
    case Engine::kKova:
      if (p > kKovaMaxParams) {
        throw ConfigError("kova keeps a dense covariance and refuses p = " +
                          std::to_string(p) + " > " +
                          std::to_string(kKovaMaxParams));
      }
      state.covariance =
          config.kova.init_var * Eigen::MatrixXd::Identity(p, p);
      break;
    case Engine::kAdamDqn:
      state.adam_m = Eigen::VectorXd::Zero(p);
      state.adam_v = Eigen::VectorXd::Zero(p);
      break;
    default:
      break;
  }
  return state;
}

double lr_schedule(const SamplerConfig& config, std::int64_t k) {
  if (k < 1) throw UsageError("learning-rate schedule is indexed from k = 1");
  if (config.decay == Decay::kConstant) return config.eps0;
  return config.eps0 * std::pow(static_cast<double>(k), -config.decay_power);
}

AugmentedState lktd_step_augmented(SamplerState& state,
                                   MeasurementModel& model,
                                   const SamplerConfig& config, Rng& rng) {
  const Eigen::Index n = model.size();
  const Eigen::Index p = state.theta.size();
  const NoiseSpec noise = config.noise(n);
  const double tempering = noise.tempering();
  const double analysis_var = 2.0 * (1.0 - config.alpha) * config.sigma2;

  AugmentedState phi{state.theta, model.target()};
  Eigen::VectorXd w_theta(p);
  Eigen::VectorXd w_xi(n);
  Eigen::VectorXd v(n);
  for (int k = 0; k < config.inner_steps; ++k) {
    const double eps = lr_schedule(config, state.step + 1);
    const double gain = kalman_gain_scalar(eps, config.alpha, config.sigma2);
    const AugmentedGradient grad = augmented_grad(phi, model, config.prior, noise);
    check_finite(grad.theta, "lktd");

    // Forecast: phi + (eps/2)(n/N) grad + N(0, (n/N) eps I).
    const double drift = 0.5 * eps / tempering;
    const double forecast_sd = std::sqrt(eps / tempering);
    fill_normal(rng, w_theta, forecast_sd);
    fill_normal(rng, w_xi, forecast_sd);
    phi.theta += drift * grad.theta + w_theta;
    phi.xi += drift * grad.xi + w_xi;

    // Analysis: v ~ N(0, (n/N) R); only xi moves.
    fill_normal(rng, v, std::sqrt(analysis_var / tempering));
    apply_analysis(phi, model.target(), v, gain);

    check_finite(phi.theta, "lktd");
    ++state.step;
  }
  state.theta = phi.theta;
  return phi;
}

void lktd_step(SamplerState& state, MeasurementModel& model,
               const SamplerConfig& config, Rng& rng) {
  lktd_step_augmented(state, model, config, rng);
}

Eigen::VectorXd prototype_step(const Eigen::VectorXd& phi,
                               const LogDensityGradient& grad_log_prior,
                               const Eigen::VectorXd& observations,
                               const SamplerConfig& config, Rng& rng) {
  const Eigen::Index n = observations.size();
  const Eigen::Index d = phi.size();
  detail::require(n >= 1 && n <= d,
                  "observed block must be non-empty and fit inside phi");
  detail::require(config.sigma2 > 0.0 && config.pseudo_pop > 0.0,
                  "sigma2 and pseudo population must be positive");
  const double eps = lr_schedule(config, 1);
  const double tempering = config.pseudo_pop / static_cast<double>(n);
  const double analysis_var = 2.0 * config.sigma2;
  const double gain = eps / (eps + analysis_var);

  const Eigen::VectorXd grad = grad_log_prior(phi);
  check_finite(grad, "prototype");
  Eigen::VectorXd w(d);
  fill_normal(rng, w, std::sqrt(eps / tempering));
  Eigen::VectorXd forecast = phi + (0.5 * eps / tempering) * grad + w;

  Eigen::VectorXd v(n);
  fill_normal(rng, v, std::sqrt(analysis_var / tempering));
  forecast.tail(n) += gain * (observations - forecast.tail(n) - v);
  return forecast;
}

void sgld_step(SamplerState& state, MeasurementModel& model,
               const SamplerConfig& config, Rng& rng) {
  const double tempering =
      config.pseudo_pop / static_cast<double>(model.size());
  Eigen::VectorXd w(state.theta.size());
  for (int k = 0; k < config.inner_steps; ++k) {
    const double eps = lr_schedule(config, state.step + 1);
    const ParamVector grad = posterior_grad(state.theta, model, config);
    check_finite(grad, "sgld");
    fill_normal(rng, w, std::sqrt(eps / tempering));
    state.theta += (0.5 * eps / tempering) * grad + w;
    check_finite(state.theta, "sgld");
    ++state.step;
  }
}

void sghmc_step(SamplerState& state, MeasurementModel& model,
                const SamplerConfig& config, Rng& rng) {
  const double tempering =
      config.pseudo_pop / static_cast<double>(model.size());
  const double damping = config.momentum_damping;
  state.momentum = Eigen::VectorXd::Zero(state.theta.size());
  Eigen::VectorXd w(state.theta.size());
  for (int k = 0; k < config.inner_steps; ++k) {
    const double eps = lr_schedule(config, state.step + 1);
    const ParamVector grad = posterior_grad(state.theta, model, config);
    check_finite(grad, "sghmc");
    fill_normal(rng, w, std::sqrt(damping * eps / tempering));
    state.momentum =
        (1.0 - damping) * state.momentum + (0.5 * eps / tempering) * grad + w;
    state.theta += state.momentum;
    check_finite(state.theta, "sghmc");
    ++state.step;
  }
}

void kova_step(SamplerState& state, MeasurementModel& model,
               const SamplerConfig& config) {
  const Eigen::Index p = state.theta.size();
  if (state.covariance.rows() != p || state.covariance.cols() != p) {
    throw ConfigError("kova covariance does not match the parameter count");
  }
  const double obs_var =
      config.kova.gamma_scale > 0.0 ? config.kova.gamma_scale : config.sigma2;
  const double rate = config.kova.learning_rate;

  // (i) predict
  state.covariance.diagonal().array() += config.kova.w_scale;
  // (iii) linearize around the predicted mean
  const Eigen::VectorXd h = model.evaluate(state.theta);
  if (!h.allFinite()) throw NumericError("kova: measurement is not finite");
  const Eigen::MatrixXd jac = model.jacobian();  // p x n
  const Eigen::MatrixXd cov_jac = state.covariance.selfadjointView<Eigen::Lower>() * jac;
  Eigen::MatrixXd innovation_cov = jac.transpose() * cov_jac;
  innovation_cov.diagonal().array() += obs_var;
  Eigen::LLT<Eigen::MatrixXd> llt(innovation_cov);
  if (llt.info() != Eigen::Success) {
    throw NumericError("kova: innovation covariance is not invertible");
  }
  // K = Sigma J Gamma_r^{-1}; K Gamma_r K^T = K (Sigma J)^T.
  const Eigen::MatrixXd gain = llt.solve(cov_jac.transpose()).transpose();
  if (!gain.allFinite()) throw NumericError("kova: singular innovation update");

  // (iv) update mean and covariance
  state.theta += rate * gain * (model.target() - h);
  state.covariance.noalias() -= rate * gain * cov_jac.transpose();
  state.covariance = (0.5 * (state.covariance + state.covariance.transpose())).eval();
  check_finite(state.theta, "kova");
  ++state.step;
}

void adam_dqn_step(SamplerState& state, MeasurementModel& model,
                   const SamplerConfig& config) {
  const AdamConfig& adam = config.adam;
  const Eigen::VectorXd& h = model.evaluate(state.theta);
  // d/dtheta of 0.5 * mean (target - h)^2
  const ParamVector grad =
      -model.vjp(model.target() - h) / static_cast<double>(model.size());
  check_finite(grad, "dqn");
  ++state.step;
  const double t = static_cast<double>(state.step);
  state.adam_m = adam.beta1 * state.adam_m + (1.0 - adam.beta1) * grad;
  state.adam_v =
      adam.beta2 * state.adam_v + (1.0 - adam.beta2) * grad.cwiseAbs2();
  const double m_correction = 1.0 - std::pow(adam.beta1, t);
  const double v_correction = 1.0 - std::pow(adam.beta2, t);
  state.theta.array() -=
      adam.lr * (state.adam_m.array() / m_correction) /
      ((state.adam_v.array() / v_correction).sqrt() + adam.eps);
  check_finite(state.theta, "dqn");
}

void sampler_step(SamplerState& state, MeasurementModel& model,
                  const SamplerConfig& config, Rng& rng) {
  switch (state.engine) {
    case Engine::kLktd: lktd_step(state, model, config, rng); return;
    case Engine::kSgld: sgld_step(state, model, config, rng); return;
    case Engine::kSghmc: sghmc_step(state, model, config, rng); return;
    case Engine::kKova: kova_step(state, model, config); return;
    case Engine::kAdamDqn: adam_dqn_step(state, model, config); return;
  }
}

}  // namespace lktd

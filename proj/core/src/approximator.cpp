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

#include "lktd/approximator.hpp"

#include <cmath>
#include <string>

#include "lktd/error.hpp"

namespace lktd {
namespace {

using MatMap = Eigen::Map<const Eigen::MatrixXd>;
using VecMap = Eigen::Map<const Eigen::VectorXd>;

std::vector<Eigen::Index> layer_offsets(const MlpSpec& spec) {
  std::vector<Eigen::Index> offsets;
  Eigen::Index offset = 0;
  for (int l = 0; l < spec.num_affine(); ++l) {
    offsets.push_back(offset);
    offset += static_cast<Eigen::Index>(spec.layer_sizes[l] + 1) *
              spec.layer_sizes[l + 1];
  }
  offsets.push_back(offset);
  return offsets;
}

void check_params(const MlpSpec& spec, const ParamVector& params) {
  if (params.size() != spec.param_count()) {
    throw ConfigError("parameter vector has length " +
                      std::to_string(params.size()) + ", network expects " +
                      std::to_string(spec.param_count()));
  }
}

}  // namespace

void MlpSpec::validate() const {
  detail::require(layer_sizes.size() >= 2,
                  "network needs at least an input and an output layer");
  for (int size : layer_sizes) {
    detail::require(size >= 1, "layer sizes must be positive");
  }
}

Eigen::Index MlpSpec::param_count() const {
  Eigen::Index count = 0;
  for (int l = 0; l + 1 < static_cast<int>(layer_sizes.size()); ++l) {
    count += static_cast<Eigen::Index>(layer_sizes[l] + 1) * layer_sizes[l + 1];
  }
  return count;
}

std::uint64_t MlpSpec::hash() const {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xffu;
      h *= 1099511628211ull;
    }
  };
  mix(layer_sizes.size());
  for (int size : layer_sizes) mix(static_cast<std::uint64_t>(size));
  mix(static_cast<std::uint64_t>(activation));
  return h;
}

ParamVector init_params(const MlpSpec& spec, Rng& rng) {
  spec.validate();
  ParamVector params = ParamVector::Zero(spec.param_count());
  const auto offsets = layer_offsets(spec);
  for (int l = 0; l < spec.num_affine(); ++l) {
    const int fan_in = spec.layer_sizes[l];
    const int fan_out = spec.layer_sizes[l + 1];
    const double bound = std::sqrt(6.0 / fan_in);
    std::uniform_real_distribution<double> uniform(-bound, bound);
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(fan_in) * fan_out;
         ++i) {
      params[offsets[l] + i] = uniform(rng);
    }
  }
  return params;
}

MlpTape::MlpTape(MlpSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  offsets_ = layer_offsets(spec_);
  activations_.resize(spec_.layer_sizes.size());
}

const Eigen::MatrixXd& MlpTape::forward(const ParamVector& params,
                                        const Eigen::MatrixXd& inputs) {
  check_params(spec_, params);
  if (inputs.rows() != spec_.input_dim()) {
    throw ConfigError("input dimension " + std::to_string(inputs.rows()) +
                      " does not match network input " +
                      std::to_string(spec_.input_dim()));
  }
  params_ = params;
  activations_[0] = inputs;
  const int layers = spec_.num_affine();
  for (int l = 0; l < layers; ++l) {
    const int fan_in = spec_.layer_sizes[l];
    const int fan_out = spec_.layer_sizes[l + 1];
    MatMap w(params_.data() + offsets_[l], fan_out, fan_in);
    VecMap b(params_.data() + offsets_[l] + fan_out * fan_in, fan_out);
    Eigen::MatrixXd& z = activations_[l + 1];
    z.noalias() = w * activations_[l];
    z.colwise() += b;
    if (l + 1 < layers) z = z.cwiseMax(0.0);
  }
  return activations_.back();
}

ParamVector MlpTape::backward(const Eigen::MatrixXd& cotangent) const {
  const Eigen::Index batch = activations_[0].cols();
  if (cotangent.rows() != spec_.output_dim() || cotangent.cols() != batch) {
    throw ConfigError("cotangent shape does not match network output batch");
  }
  ParamVector grad(spec_.param_count());
  Eigen::MatrixXd delta = cotangent;
  Eigen::MatrixXd next;
  for (int l = spec_.num_affine() - 1; l >= 0; --l) {
    const int fan_in = spec_.layer_sizes[l];
    const int fan_out = spec_.layer_sizes[l + 1];
    Eigen::Map<Eigen::MatrixXd> gw(grad.data() + offsets_[l], fan_out, fan_in);
    Eigen::Map<Eigen::VectorXd> gb(grad.data() + offsets_[l] + fan_out * fan_in,
                                   fan_out);
    gw.noalias() = delta * activations_[l].transpose();
    gb = delta.rowwise().sum();
    if (l > 0) {
      MatMap w(params_.data() + offsets_[l], fan_out, fan_in);
      next.noalias() = w.transpose() * delta;
      delta = (activations_[l].array() > 0.0).select(next, 0.0);
    }
  }
  return grad;
}

Eigen::MatrixXd MlpTape::per_sample_backward(
    const Eigen::MatrixXd& cotangent) const {
  const Eigen::Index batch = activations_[0].cols();
  if (cotangent.rows() != spec_.output_dim() || cotangent.cols() != batch) {
    throw ConfigError("cotangent shape does not match network output batch");
  }
  Eigen::MatrixXd grads(spec_.param_count(), batch);
  Eigen::MatrixXd delta = cotangent;
  Eigen::MatrixXd next;
  for (int l = spec_.num_affine() - 1; l >= 0; --l) {
    const int fan_in = spec_.layer_sizes[l];
    const int fan_out = spec_.layer_sizes[l + 1];
    const Eigen::MatrixXd& a = activations_[l];
    for (Eigen::Index j = 0; j < batch; ++j) {
      double* col = grads.col(j).data() + offsets_[l];
      for (int k = 0; k < fan_in; ++k) {
        Eigen::Map<Eigen::VectorXd>(col + k * fan_out, fan_out) =
            delta.col(j) * a(k, j);
      }
      Eigen::Map<Eigen::VectorXd>(col + fan_in * fan_out, fan_out) =
          delta.col(j);
    }
    if (l > 0) {
      MatMap w(params_.data() + offsets_[l], fan_out, fan_in);
      next.noalias() = w.transpose() * delta;
      delta = (activations_[l].array() > 0.0).select(next, 0.0);
    }
  }
  return grads;
}

Eigen::MatrixXd mlp_forward(const MlpSpec& spec, const ParamVector& params,
                            const Eigen::MatrixXd& inputs) {
  MlpTape tape(spec);
  return tape.forward(params, inputs);
}

ParamVector mlp_vjp(const MlpSpec& spec, const ParamVector& params,
                    const Eigen::MatrixXd& inputs,
                    const Eigen::MatrixXd& cotangent) {
  MlpTape tape(spec);
  tape.forward(params, inputs);
  return tape.backward(cotangent);
}

void MixturePrior::validate() const {
  detail::require(lambda > 0.0 && lambda <= 1.0,
                  "prior.lambda must lie in (0, 1]");
  detail::require(sigma1 > 0.0, "prior.sigma1 must be positive");
  if (lambda < 1.0) {
    detail::require(sigma0 > 0.0, "prior.sigma0 must be positive");
    detail::require(sigma0 < sigma1, "prior.sigma0 must be below sigma1");
  }
}

ParamVector log_prior_grad(const MixturePrior& prior,
                           const ParamVector& params) {
  if (!params.allFinite()) {
    throw NumericError("log_prior_grad: non-finite parameter");
  }
  const double inv1 = 1.0 / (prior.sigma1 * prior.sigma1);
  if (prior.lambda >= 1.0) return -params * inv1;

  const double inv0 = 1.0 / (prior.sigma0 * prior.sigma0);
  const double log_w0 = std::log1p(-prior.lambda) - std::log(prior.sigma0);
  const double log_w1 = std::log(prior.lambda) - std::log(prior.sigma1);
  ParamVector grad(params.size());
  for (Eigen::Index i = 0; i < params.size(); ++i) {
    const double t = params[i];
    const double sq = t * t;
    const double l0 = log_w0 - 0.5 * sq * inv0;
    const double l1 = log_w1 - 0.5 * sq * inv1;
    // r1 = responsibility of the wide component.
    const double r1 = 1.0 / (1.0 + std::exp(l0 - l1));
    grad[i] = -t * ((1.0 - r1) * inv0 + r1 * inv1);
  }
  return grad;
}

}  // namespace lktd

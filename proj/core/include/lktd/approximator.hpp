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
#include <vector>

#include "lktd/random.hpp"

namespace lktd {

/// Flat network parameter vector. Layout, layer by layer: the weight matrix
/// (fan_out x fan_in, column-major) followed by its bias vector.
using ParamVector = Eigen::VectorXd;

enum class Activation { kRelu };

/// Fully-connected network shape: relu on hidden layers, identity on the
/// output layer.
struct MlpSpec {
  std::vector<int> layer_sizes;
  Activation activation = Activation::kRelu;

  void validate() const;
  int input_dim() const { return layer_sizes.front(); }
  int output_dim() const { return layer_sizes.back(); }
  int num_affine() const { return static_cast<int>(layer_sizes.size()) - 1; }
  Eigen::Index param_count() const;
  /// FNV-1a over the layer sizes; identifies the shape in pool snapshots.
  std::uint64_t hash() const;

  friend bool operator==(const MlpSpec&, const MlpSpec&) = default;
};

/// He-uniform weights U(-sqrt(6/fan_in), sqrt(6/fan_in)), zero biases.
ParamVector init_params(const MlpSpec& spec, Rng& rng);

/// Inputs are column vectors: `inputs` is input_dim x batch and the result
/// is output_dim x batch.
Eigen::MatrixXd mlp_forward(const MlpSpec& spec, const ParamVector& params,
                            const Eigen::MatrixXd& inputs);

/// Sum over the batch of J^T * cotangent, with J the output-by-parameter
/// Jacobian of each column. No averaging.
ParamVector mlp_vjp(const MlpSpec& spec, const ParamVector& params,
                    const Eigen::MatrixXd& inputs,
                    const Eigen::MatrixXd& cotangent);

/// Forward pass that keeps the activations so that several reverse passes
/// can reuse them. Holds a copy of the parameters it was run with.
class MlpTape {
 public:
  explicit MlpTape(MlpSpec spec);

  const Eigen::MatrixXd& forward(const ParamVector& params,
                                 const Eigen::MatrixXd& inputs);
  const Eigen::MatrixXd& outputs() const { return activations_.back(); }

  /// Batch-summed vector-Jacobian product.
  ParamVector backward(const Eigen::MatrixXd& cotangent) const;
  /// Column j holds J_j^T * cotangent.col(j); p x batch.
  Eigen::MatrixXd per_sample_backward(const Eigen::MatrixXd& cotangent) const;

  const MlpSpec& spec() const { return spec_; }

 private:
  MlpSpec spec_;
  ParamVector params_;
  std::vector<Eigen::Index> offsets_;
  // activations_[0] is the input batch, activations_[l] the output of
  // affine layer l (after relu for hidden layers).
  std::vector<Eigen::MatrixXd> activations_;
};

/// Coordinatewise prior (1 - lambda) N(0, sigma0^2) + lambda N(0, sigma1^2).
/// lambda == 1 is accepted and means the single Gaussian N(0, sigma1^2).
struct MixturePrior {
  double lambda = 0.5;
  double sigma0 = 0.05;
  double sigma1 = 0.5;

  void validate() const;
  static MixturePrior gaussian(double sigma) { return {1.0, sigma, sigma}; }

  friend bool operator==(const MixturePrior&, const MixturePrior&) = default;
};

/// Gradient of the log prior density, computed from log-space component
/// responsibilities.
ParamVector log_prior_grad(const MixturePrior& prior, const ParamVector& params);

}  // namespace lktd

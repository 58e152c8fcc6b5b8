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


// Evaluation statistics over Q-value sample pools and reward curves.
//
// Quantiles use linear interpolation between order statistics: for sorted
// x_0..x_{m-1} and probability q, h = (m - 1) q and the value is
// x_floor(h) + (h - floor(h)) (x_floor(h)+1 - x_floor(h)).

#pragma once

#include <Eigen/Core>

#include <vector>

#include "lktd/approximator.hpp"
#include "lktd/oracle.hpp"
#include "lktd/runtime.hpp"

namespace lktd {

struct IntervalEstimate {
  double lower = 0.0;
  double upper = 0.0;
  double level = 0.95;

  double width() const { return upper - lower; }
  bool contains(double v) const { return lower <= v && v <= upper; }
};

double quantile(std::vector<double> values, double prob);
double quantile_sorted(const std::vector<double>& sorted, double prob);

double q_point_estimate(const Eigen::VectorXd& pool_values);
IntervalEstimate prediction_interval(const Eigen::VectorXd& pool_values,
                                     double level);

/// Q-values of every pool member at the 100 indoor cells, one M x 100
/// matrix per action, columns indexed by QTable::state(x, y).
struct IndoorPoolValues {
  std::vector<Eigen::MatrixXd> per_action;
  std::size_t members() const {
    return per_action.empty() ? 0 : static_cast<std::size_t>(per_action[0].rows());
  }
};

/// Network inputs of the indoor cells in QTable::state order.
Eigen::MatrixXd indoor_state_inputs();
IndoorPoolValues evaluate_indoor_pool(const SamplePool& pool,
                                      const MlpSpec& spec);

/// The 99 non-goal cells the metrics average over.
std::vector<int> indoor_metric_states();

/// Mean over non-goal cells of (pool mean - oracle)^2.
double mse_q(const IndoorPoolValues& values, const QTable& oracle, int action);
double mse_q(const SamplePool& pool, const MlpSpec& spec, const QTable& oracle,
             int action);

struct CoverageResult {
  double coverage = 0.0;
  double mean_width = 0.0;
};

/// Fraction of (cell, action) pairs, over non-goal cells and `actions`,
/// whose oracle value lies inside the pool prediction interval.
CoverageResult coverage_rate(const IndoorPoolValues& values,
                             const QTable& oracle, double level,
                             const std::vector<int>& actions);
CoverageResult coverage_rate(const SamplePool& pool, const MlpSpec& spec,
                             const QTable& oracle, double level,
                             const std::vector<int>& actions);

/// Share of pool members whose greedy action (first maximum) at the cell
/// is `action`.
double mean_policy_probability(const IndoorPoolValues& values, int x, int y,
                               int action);
double mean_policy_probability(const SamplePool& pool, const MlpSpec& spec,
                               int x, int y, int action);

struct TrimmedSummary {
  double mean = 0.0;
  /// Sample standard deviation (n - 1 denominator) of the kept values.
  double std = 0.0;
  std::size_t kept = 0;
};

/// Drops values strictly outside (Q1 - 1.5 IQR, Q3 + 1.5 IQR).
TrimmedSummary trimmed_mean_std(const std::vector<double>& values);

struct RewardBand {
  std::vector<double> mean;
  std::vector<double> lower;
  std::vector<double> upper;
};

/// Per time point: mean after dropping floor(drop_frac R) values from each
/// end, and the drop_frac / 1 - drop_frac quantiles. Non-finite entries are
/// ignored.
RewardBand reward_band(const std::vector<std::vector<double>>& curves,
                       double drop_frac);

}  // namespace lktd

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


#include "lktd/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lktd/envs.hpp"
#include "lktd/error.hpp"

namespace lktd {

double quantile_sorted(const std::vector<double>& sorted, double prob) {
  if (sorted.empty()) throw UsageError("quantile of an empty sample");
  detail::require(prob >= 0.0 && prob <= 1.0, "quantile level must lie in [0, 1]");
  const double h = static_cast<double>(sorted.size() - 1) * prob;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

double quantile(std::vector<double> values, double prob) {
  std::sort(values.begin(), values.end());
  return quantile_sorted(values, prob);
}

double q_point_estimate(const Eigen::VectorXd& pool_values) {
  if (pool_values.size() == 0) throw UsageError("point estimate of an empty pool");
  return pool_values.mean();
}

IntervalEstimate prediction_interval(const Eigen::VectorXd& pool_values,
                                     double level) {
  if (pool_values.size() < 2) {
    throw UsageError("a prediction interval needs at least 2 pool values");
  }
  detail::require(level > 0.0 && level <= 1.0, "interval level must lie in (0, 1]");
  std::vector<double> sorted(pool_values.begin(), pool_values.end());
  std::sort(sorted.begin(), sorted.end());
  const double tail = (1.0 - level) / 2.0;
  return {quantile_sorted(sorted, tail), quantile_sorted(sorted, 1.0 - tail),
          level};
}

Eigen::MatrixXd indoor_state_inputs() {
  Eigen::MatrixXd inputs(2, kGridSize * kGridSize);
  for (int x = 0; x < kGridSize; ++x) {
    for (int y = 0; y < kGridSize; ++y) {
      inputs.col(QTable::state(x, y)) =
          Eigen::Vector2d(x, y) / static_cast<double>(kGridSize - 1);
    }
  }
  return inputs;
}

IndoorPoolValues evaluate_indoor_pool(const SamplePool& pool,
                                      const MlpSpec& spec) {
  detail::require(spec.input_dim() == 2 && spec.output_dim() == 4,
                  "indoor metrics need a 2-input, 4-action network");
  return {pool_q_values_all(pool, spec, indoor_state_inputs())};
}

std::vector<int> indoor_metric_states() {
  std::vector<int> states;
  for (int x = 0; x < kGridSize; ++x) {
    for (int y = 0; y < kGridSize; ++y) {
      if (x == kGridSize - 1 && y == kGridSize - 1) continue;
      states.push_back(QTable::state(x, y));
    }
  }
  return states;
}

namespace {

const Eigen::MatrixXd& action_values(const IndoorPoolValues& values, int action) {
  if (values.members() == 0) throw UsageError("sample pool is empty");
  if (action < 0 || action >= static_cast<int>(values.per_action.size())) {
    throw UsageError("action index outside the Q head");
  }
  const Eigen::MatrixXd& m = values.per_action[static_cast<std::size_t>(action)];
  if (m.cols() != kGridSize * kGridSize) {
    throw UsageError("pool values do not cover all 100 indoor cells");
  }
  return m;
}

void check_oracle(const QTable& oracle) {
  if (oracle.q.rows() != kGridSize * kGridSize || oracle.q.cols() != 4) {
    throw UsageError("oracle table does not cover all indoor cells");
  }
}

}  // namespace

double mse_q(const IndoorPoolValues& values, const QTable& oracle, int action) {
  check_oracle(oracle);
  const Eigen::MatrixXd& m = action_values(values, action);
  const Eigen::RowVectorXd estimate = m.colwise().mean();
  const std::vector<int> states = indoor_metric_states();
  double total = 0.0;
  for (int s : states) {
    const double diff = estimate[s] - oracle.q(s, action);
    total += diff * diff;
  }
  return total / static_cast<double>(states.size());
}

double mse_q(const SamplePool& pool, const MlpSpec& spec, const QTable& oracle,
             int action) {
  return mse_q(evaluate_indoor_pool(pool, spec), oracle, action);
}

CoverageResult coverage_rate(const IndoorPoolValues& values,
                             const QTable& oracle, double level,
                             const std::vector<int>& actions) {
  check_oracle(oracle);
  detail::require(!actions.empty(), "coverage needs at least one action");
  CoverageResult result;
  std::size_t pairs = 0;
  for (int a : actions) {
    const Eigen::MatrixXd& m = action_values(values, a);
    for (int s : indoor_metric_states()) {
      const IntervalEstimate iv = prediction_interval(m.col(s), level);
      result.coverage += iv.contains(oracle.q(s, a)) ? 1.0 : 0.0;
      result.mean_width += iv.width();
      ++pairs;
    }
  }
  result.coverage /= static_cast<double>(pairs);
  result.mean_width /= static_cast<double>(pairs);
  return result;
}

CoverageResult coverage_rate(const SamplePool& pool, const MlpSpec& spec,
                             const QTable& oracle, double level,
                             const std::vector<int>& actions) {
  return coverage_rate(evaluate_indoor_pool(pool, spec), oracle, level, actions);
}

double mean_policy_probability(const IndoorPoolValues& values, int x, int y,
                               int action) {
  if (values.members() == 0) throw UsageError("sample pool is empty");
  detail::require(x >= 0 && x < kGridSize && y >= 0 && y < kGridSize,
                  "cell outside the indoor grid");
  const int s = QTable::state(x, y);
  const auto actions = static_cast<int>(values.per_action.size());
  detail::require(action >= 0 && action < actions, "action index outside the Q head");
  std::size_t hits = 0;
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(values.members()); ++i) {
    int greedy = 0;
    double best = values.per_action[0](i, s);
    for (int a = 1; a < actions; ++a) {
      const double q = values.per_action[static_cast<std::size_t>(a)](i, s);
      if (q > best) {
        best = q;
        greedy = a;
      }
    }
    if (greedy == action) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(values.members());
}

double mean_policy_probability(const SamplePool& pool, const MlpSpec& spec,
                               int x, int y, int action) {
  return mean_policy_probability(evaluate_indoor_pool(pool, spec), x, y, action);
}

TrimmedSummary trimmed_mean_std(const std::vector<double>& values) {
  if (values.size() < 4) {
    throw UsageError("trimmed summary needs at least 4 values, got " +
                     std::to_string(values.size()));
  }
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  const double q1 = quantile_sorted(sorted, 0.25);
  const double q3 = quantile_sorted(sorted, 0.75);
  const double iqr = q3 - q1;
  const double low = q1 - 1.5 * iqr;
  const double high = q3 + 1.5 * iqr;
  std::vector<double> kept;
  for (double v : sorted) {
    if (v >= low && v <= high) kept.push_back(v);
  }
  TrimmedSummary out;
  out.kept = kept.size();
  double sum = 0.0;
  for (double v : kept) sum += v;
  out.mean = sum / static_cast<double>(kept.size());
  if (kept.size() >= 2) {
    double ss = 0.0;
    for (double v : kept) ss += (v - out.mean) * (v - out.mean);
    out.std = std::sqrt(ss / static_cast<double>(kept.size() - 1));
  }
  return out;
}

RewardBand reward_band(const std::vector<std::vector<double>>& curves,
                       double drop_frac) {
  if (curves.size() < 3) throw UsageError("a reward band needs at least 3 replicates");
  detail::require(drop_frac >= 0.0 && drop_frac < 0.5,
                  "drop fraction must lie in [0, 0.5)");
  const std::size_t length = curves.front().size();
  for (const auto& c : curves) {
    if (c.size() != length) throw UsageError("reward curves are not aligned");
  }
  RewardBand band;
  const double nan = std::nan("");
  std::vector<double> column;
  for (std::size_t t = 0; t < length; ++t) {
    column.clear();
    for (const auto& c : curves) {
      if (std::isfinite(c[t])) column.push_back(c[t]);
    }
    if (column.empty()) {
      band.mean.push_back(nan);
      band.lower.push_back(nan);
      band.upper.push_back(nan);
      continue;
    }
    std::sort(column.begin(), column.end());
    const auto drop = static_cast<std::size_t>(
        std::floor(drop_frac * static_cast<double>(column.size())));
    double sum = 0.0;
    for (std::size_t i = drop; i < column.size() - drop; ++i) sum += column[i];
    band.mean.push_back(sum / static_cast<double>(column.size() - 2 * drop));
    band.lower.push_back(quantile_sorted(column, drop_frac));
    band.upper.push_back(quantile_sorted(column, 1.0 - drop_frac));
  }
  return band;
}

}  // namespace lktd

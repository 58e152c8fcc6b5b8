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


#include "lktd/oracle.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <fstream>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "lktd/csv.hpp"
#include "lktd/envs.hpp"
#include "lktd/error.hpp"

namespace lktd {
namespace {

constexpr int kStates = kGridSize * kGridSize;
constexpr int kActions = 4;
constexpr int kGoal = (kGridSize - 1) * kGridSize + (kGridSize - 1);

int next_state(int s, int a) {
  const Eigen::Vector2i cell = indoor_move(s / kGridSize, s % kGridSize, a);
  return QTable::state(cell.x(), cell.y());
}

QTable empty_table(double eps, double gamma, OracleMethod method) {
  QTable t;
  t.q = Eigen::MatrixXd::Zero(kStates, kActions);
  t.stderr_q = Eigen::MatrixXd::Zero(kStates, kActions);
  t.visits = Eigen::MatrixXi::Zero(kStates, kActions);
  t.eps_explore = eps;
  t.gamma = gamma;
  t.method = method;
  return t;
}

void check_args(double eps, double gamma) {
  detail::require(eps >= 0.0 && eps < 1.0, "oracle eps must lie in [0, 1)");
  detail::require(gamma > 0.0 && gamma <= 1.0, "oracle gamma must lie in (0, 1]");
}

}  // namespace

QTable grid_q_star_dp(double eps_explore, double gamma, double tolerance,
                      std::int64_t max_iterations) {
  check_args(eps_explore, gamma);
  QTable table = empty_table(eps_explore, gamma, OracleMethod::kDp);
  int successor[kStates][kActions];
  for (int s = 0; s < kStates; ++s) {
    for (int a = 0; a < kActions; ++a) successor[s][a] = next_state(s, a);
  }
  Eigen::VectorXd value = Eigen::VectorXd::Zero(kStates);
  Eigen::MatrixXd& q = table.q;
  for (std::int64_t it = 0; it < max_iterations; ++it) {
    double change = 0.0;
    for (int s = 0; s < kStates; ++s) {
      if (s == kGoal) continue;
      for (int a = 0; a < kActions; ++a) {
        const double updated = -1.0 + gamma * value[successor[s][a]];
        change = std::max(change, std::abs(updated - q(s, a)));
        q(s, a) = updated;
      }
    }
    for (int s = 0; s < kStates; ++s) {
      value[s] = s == kGoal ? 0.0
                            : (1.0 - eps_explore) * q.row(s).maxCoeff() +
                                  eps_explore * q.row(s).mean();
    }
    if (change < tolerance) return table;
  }
  throw NumericError("Q-table iteration did not converge");
}

QTable grid_q_star_mc(double eps_explore, double gamma,
                      const MonteCarloOptions& options, Rng& rng) {
  check_args(eps_explore, gamma);
  detail::require(options.episodes >= 1, "Monte Carlo needs at least one episode");
  detail::require(options.max_steps >= 1, "Monte Carlo max_steps must be >= 1");
  QTable table = empty_table(eps_explore, gamma, OracleMethod::kMonteCarlo);

  // Welford accumulators per pair.
  Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(kStates, kActions);
  Eigen::MatrixXd m2 = Eigen::MatrixXd::Zero(kStates, kActions);
  Eigen::MatrixXi count = Eigen::MatrixXi::Zero(kStates, kActions);

  std::uniform_int_distribution<int> pick_state(0, kStates - 2);
  std::uniform_int_distribution<int> pick_action(0, kActions - 1);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::normal_distribution<double> noise(-1.0, options.reward_sd);

  std::vector<int> pairs;
  std::vector<double> rewards;
  std::vector<char> first;
  Eigen::MatrixXi seen = Eigen::MatrixXi::Constant(kStates, kActions, -1);

  for (std::int64_t ep = 0; ep < options.episodes; ++ep) {
    pairs.clear();
    rewards.clear();
    int s = pick_state(rng);
    if (s >= kGoal) ++s;
    int a = pick_action(rng);
    for (int t = 0; t < options.max_steps; ++t) {
      pairs.push_back(s * kActions + a);
      rewards.push_back(options.reward_noise ? noise(rng) : -1.0);
      s = next_state(s, a);
      if (s == kGoal) break;
      if (coin(rng) < eps_explore) {
        a = pick_action(rng);
      } else {
        const int x = s / kGridSize;
        const int y = s % kGridSize;
        if (x < kGridSize - 1 && y < kGridSize - 1) {
          a = coin(rng) < 0.5 ? kNorth : kEast;
        } else {
          a = y < kGridSize - 1 ? kNorth : kEast;
        }
      }
    }
    first.assign(pairs.size(), 0);
    const auto tag = static_cast<int>(ep & 0x3fffffff);
    for (std::size_t t = 0; t < pairs.size(); ++t) {
      int& mark = seen(pairs[t] / kActions, pairs[t] % kActions);
      if (mark != tag) {
        mark = tag;
        first[t] = 1;
      }
    }
    double ret = 0.0;
    for (std::size_t t = pairs.size(); t-- > 0;) {
      ret = rewards[t] + gamma * ret;
      if (!first[t]) continue;
      const int ps = pairs[t] / kActions;
      const int pa = pairs[t] % kActions;
      const int n = ++count(ps, pa);
      const double delta = ret - mean(ps, pa);
      mean(ps, pa) += delta / n;
      m2(ps, pa) += delta * (ret - mean(ps, pa));
    }
  }
  for (int s = 0; s < kStates; ++s) {
    for (int a = 0; a < kActions; ++a) {
      const int n = count(s, a);
      table.visits(s, a) = n;
      table.q(s, a) = mean(s, a);
      table.stderr_q(s, a) =
          n >= 2 ? std::sqrt(m2(s, a) / (n - 1) / n) : 0.0;
    }
  }
  return table;
}

void write_qtable_csv(std::ostream& out, const QTable& table) {
  out << "x,y,action,q,stderr\n";
  for (int x = 0; x < kGridSize; ++x) {
    for (int y = 0; y < kGridSize; ++y) {
      for (int a = 0; a < kActions; ++a) {
        const int s = QTable::state(x, y);
        out << x << ',' << y << ',' << indoor_action_name(a) << ',' << format_double(table.q(s, a))
            << ',' << format_double(table.stderr_q(s, a)) << '\n';
      }
    }
  }
}

void write_qtable_csv(const std::string& path, const QTable& table) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  write_qtable_csv(out, table);
  if (!out) throw IoError("write failed for " + path);
}

QTable read_qtable_csv(const std::string& path) {
  const CsvTable csv = read_csv(path);
  QTable table = empty_table(0.0, 1.0, OracleMethod::kDp);
  const std::size_t cx = csv.column("x"), cy = csv.column("y"),
                    ca = csv.column("action"), cq = csv.column("q"),
                    cs = csv.column("stderr");
  Eigen::MatrixXi filled = Eigen::MatrixXi::Zero(kStates, kActions);
  for (const auto& row : csv.rows) {
    const int x = std::stoi(row[cx]);
    const int y = std::stoi(row[cy]);
    int a = -1;
    try {
      a = parse_indoor_action(row[ca]);
    } catch (const ConfigError&) {
      throw IoError(path + ": unknown action '" + row[ca] + "'");
    }
    if (x < 0 || x >= kGridSize || y < 0 || y >= kGridSize || a < 0 ||
        a >= kActions) {
      throw IoError(path + ": row outside the indoor grid");
    }
    const int s = QTable::state(x, y);
    table.q(s, a) = parse_double(row[cq]);
    table.stderr_q(s, a) = parse_double(row[cs]);
    filled(s, a) = 1;
  }
  if (filled.sum() != kStates * kActions) {
    throw IoError(path + ": Q-table does not cover every state and action");
  }
  return table;
}

GaussianPosterior conjugate_posterior(const ConjugateSpec& spec,
                                      const Eigen::VectorXd& observations) {
  const Eigen::Index n = spec.design.rows();
  const Eigen::Index d = spec.design.cols();
  detail::require(n >= 1 && d >= 1, "conjugate design must be non-empty");
  detail::require(observations.size() == n,
                  "one observation per design row is required");
  detail::require(spec.prior_mean.size() == d && spec.prior_cov.rows() == d &&
                      spec.prior_cov.cols() == d,
                  "prior shape does not match the design");
  detail::require(spec.sigma2 > 0.0 && spec.pseudo_pop > 0.0,
                  "sigma2 and pseudo population must be positive");

  Eigen::LLT<Eigen::MatrixXd> prior_llt(spec.prior_cov);
  if (prior_llt.info() != Eigen::Success) {
    throw NumericError("prior covariance is not positive definite");
  }
  const Eigen::MatrixXd prior_prec =
      prior_llt.solve(Eigen::MatrixXd::Identity(d, d));
  const double weight = spec.pseudo_pop / static_cast<double>(n) / spec.sigma2;
  const Eigen::MatrixXd precision =
      prior_prec + weight * spec.design.transpose() * spec.design;
  Eigen::LLT<Eigen::MatrixXd> llt(precision);
  if (llt.info() != Eigen::Success) {
    throw NumericError("posterior precision is singular");
  }
  GaussianPosterior post;
  post.cov = llt.solve(Eigen::MatrixXd::Identity(d, d));
  post.mean = llt.solve(prior_prec * spec.prior_mean +
                        weight * spec.design.transpose() * observations);
  return post;
}

}  // namespace lktd

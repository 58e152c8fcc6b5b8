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


// Configuration-driven experiments: JSON config documents, seeded
// replicates, artifact files and aggregate reports.

#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "lktd/metrics.hpp"
#include "lktd/oracle.hpp"
#include "lktd/runtime.hpp"

namespace lktd {

struct ExperimentConfig {
  std::string name = "experiment";
  /// Label written to the CSV files; the engine name when empty.
  std::string algorithm;
  /// Everything but `run.seed`, which is seed_base + replicate index.
  RunConfig run;
  /// Indoor reference table the pool metrics compare against.
  double oracle_eps = 0.01;
  double oracle_gamma = 1.0;
  double level = 0.95;
  /// Also write each replicate's sample pool (replicate_<k>/pool.bin).
  bool save_pool = false;
  int replicates = 1;
  std::uint64_t seed_base = 0;
  std::string output_dir = "runs/experiment";

  void validate() const;
  std::string label() const;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Parses a JSON config document. `overrides` are "dotted.key=value"
/// strings applied to the document before validation; values are read as
/// JSON when they parse as JSON and as plain strings otherwise. Unknown keys
/// raise ConfigError naming the key.
ExperimentConfig parse_config(const std::string& text,
                              const std::vector<std::string>& overrides = {});
ExperimentConfig load_config(const std::string& path,
                             const std::vector<std::string>& overrides = {});
/// Complete JSON document; parse_config(serialize_config(c)) == c.
std::string serialize_config(const ExperimentConfig& config);

struct ReplicateResult {
  int index = 0;
  std::uint64_t seed = 0;
  RunArtifacts artifacts;
  /// Filled for the indoor environment when the pool is non-empty.
  bool has_pool_metrics = false;
  double mse_north = 0.0;
  double mse_east = 0.0;
  CoverageResult coverage_north;
  CoverageResult coverage_east;
  /// 100 x 4 mean policy probabilities, rows in QTable::state order.
  Eigen::MatrixXd policy;
};

/// Trains replicate `index` and computes the pool metrics against `oracle`
/// (may be null for non-indoor environments).
ReplicateResult run_replicate(const ExperimentConfig& config, int index,
                              const QTable* oracle);

/// Runs all replicates (up to LKTD_THREADS at a time, default: hardware
/// threads) and writes into config.output_dir:
///   config.json, mse.csv, coverage.csv, policy_prob.csv, timing.csv,
///   rewards.csv and replicate_<k>/policy_prob.csv (+ pool.bin).
/// Returns 0 when every replicate finished, 1 otherwise.
int cmd_run(const ExperimentConfig& config, std::ostream& log);

struct OracleRequest {
  std::string env = "indoor_escape";
  double eps = 0.01;
  double gamma = 1.0;
  OracleMethod method = OracleMethod::kDp;
  std::int64_t episodes = 1'000'000;
  bool reward_noise = true;
  std::uint64_t seed = 0;
  std::string out_path;
};

/// Writes the oracle Q-table CSV; non-indoor environments are a UsageError.
void cmd_oracle(const OracleRequest& request);

/// Aggregates one or more run directories into out_dir: summary.csv,
/// table_mse.csv, table_coverage.csv and reward_band.csv.
void cmd_report(const std::vector<std::string>& run_dirs,
                const std::string& out_dir);

/// Worker count for replicate parallelism.
int replicate_threads();

}  // namespace lktd

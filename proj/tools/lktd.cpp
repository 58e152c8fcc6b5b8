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


// lktd: run experiments, write oracle Q-tables, aggregate run directories.
//
//   lktd run --config presets/indoor_lktd_N10000.json --set runtime.total_steps=20000
//   lktd run --config presets/cartpole_lktd.json --replicates 3 --out runs/cp
//   lktd oracle --env indoor_escape --method dp --eps 0.01 --gamma 1 --out q.csv
//   lktd oracle --method mc --episodes 1000000 --seed 7 --out q_mc.csv
//   lktd report runs/indoor_lktd runs/indoor_dqn --out reports/indoor

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lktd/error.hpp"
#include "lktd/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Kalman-Langevin temporal-difference experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> replicates;
  CLI::App* run = app.add_subcommand("run", "train seeded replicates from a config file");
  run->add_option("--config", config_path, "JSON experiment config")->required();
  run->add_option("--set", overrides, "dotted.key=value override (repeatable)");
  run->add_option("--out", out_dir, "output directory (overrides output_dir)");
  run->add_option("--seed", seed, "seed base (overrides seed_base)");
  run->add_option("--replicates", replicates, "replicate count");

  lktd::OracleRequest oracle;
  std::string method = "dp";
  bool no_noise = false;
  CLI::App* orc = app.add_subcommand("oracle", "write the indoor Q-table of the eps-greedy optimal policy");
  orc->add_option("--env", oracle.env, "environment")->capture_default_str();
  orc->add_option("--eps", oracle.eps, "exploration rate")->capture_default_str();
  orc->add_option("--gamma", oracle.gamma, "discount")->capture_default_str();
  orc->add_option("--method", method, "dp or mc")
      ->check(CLI::IsMember({"dp", "mc"}))
      ->capture_default_str();
  orc->add_option("--episodes", oracle.episodes, "Monte Carlo episodes")->capture_default_str();
  orc->add_option("--seed", oracle.seed, "Monte Carlo seed")->capture_default_str();
  orc->add_flag("--no-reward-noise", no_noise, "use the expected reward -1 in rollouts");
  orc->add_option("--out", oracle.out_path, "output CSV")->required();

  std::vector<std::string> run_dirs;
  std::string report_out;
  CLI::App* rep = app.add_subcommand("report", "trimmed-mean tables and reward bands");
  rep->add_option("dirs", run_dirs, "run directories")->required();
  rep->add_option("--out", report_out, "output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      if (out_dir) overrides.push_back("output_dir=\"" + *out_dir + "\"");
      if (seed) overrides.push_back("seed_base=" + std::to_string(*seed));
      if (replicates) overrides.push_back("replicates=" + std::to_string(*replicates));
      const lktd::ExperimentConfig config = lktd::load_config(config_path, overrides);
      return lktd::cmd_run(config, std::cerr);
    }
    if (orc->parsed()) {
      oracle.method = method == "dp" ? lktd::OracleMethod::kDp
                                     : lktd::OracleMethod::kMonteCarlo;
      oracle.reward_noise = !no_noise;
      lktd::cmd_oracle(oracle);
      return 0;
    }
    if (rep->parsed()) {
      lktd::cmd_report(run_dirs, report_out);
      return 0;
    }
  } catch (const lktd::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const lktd::UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

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


#include "lktd/experiment.hpp"

#include <array>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "lktd/csv.hpp"
#include "lktd/error.hpp"

namespace lktd {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

// Reads the members of one JSON object, remembering which keys were used so
// that leftovers can be reported as unknown.
class Section {
 public:
  Section(const json& doc, std::string path) : path_(std::move(path)) {
    if (!doc.is_object()) {
      throw ConfigError("config key '" + display() + "' must be an object");
    }
    doc_ = &doc;
  }

  template <typename T>
  void read(const char* key, T& field) {
    seen_.insert(key);
    const auto it = doc_->find(key);
    if (it == doc_->end()) return;
    try {
      field = it->get<T>();
    } catch (const json::exception&) {
      throw ConfigError("config key '" + qualified(key) + "' has the wrong type");
    }
  }

  template <typename T, typename Parse>
  void read_enum(const char* key, T& field, Parse parse) {
    std::string text;
    bool present = doc_->contains(key);
    read(key, text);
    if (!present) return;
    try {
      field = parse(text);
    } catch (const ConfigError& e) {
      throw ConfigError("config key '" + qualified(key) + "': " + e.what());
    }
  }

  bool has(const char* key) const { return doc_->contains(key); }

  Section child(const char* key) {
    seen_.insert(key);
    static const json kEmpty = json::object();
    const auto it = doc_->find(key);
    return Section(it == doc_->end() ? kEmpty : *it, qualified(key));
  }

  void finish() const {
    for (const auto& item : doc_->items()) {
      if (!seen_.count(item.key())) {
        throw ConfigError("unknown config key '" + qualified(item.key()) + "'");
      }
    }
  }

 private:
  std::string qualified(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }
  std::string display() const { return path_.empty() ? "<root>" : path_; }

  const json* doc_ = nullptr;
  std::string path_;
  std::set<std::string> seen_;
};

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("override '" + assignment + "' is not key=value");
  }
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(text);
  } catch (const json::exception&) {
    value = text;
  }
  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot - start);
    if (part.empty()) throw ConfigError("override key '" + key + "' is malformed");
    if (!node->is_object()) {
      throw ConfigError("override key '" + key + "' walks into a non-object");
    }
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    node = &(*node)[part];
    if (node->is_null()) *node = json::object();
    start = dot + 1;
  }
}

Decay parse_decay(const std::string& text) {
  if (text == "constant") return Decay::kConstant;
  if (text == "polynomial") return Decay::kPolynomial;
  throw ConfigError("unknown decay '" + text + "'");
}

std::string decay_name(Decay d) {
  return d == Decay::kConstant ? "constant" : "polynomial";
}

ExperimentConfig from_json(const json& doc) {
  ExperimentConfig c;
  Section root(doc, "");
  root.read("name", c.name);
  root.read("algorithm", c.algorithm);
  root.read_enum("engine", c.run.engine, [](const std::string& t) { return parse_engine(t); });
  root.read("replicates", c.replicates);
  root.read("seed_base", c.seed_base);
  root.read("output_dir", c.output_dir);

  {
    Section env = root.child("env");
    EnvKind kind = EnvKind::kIndoorEscape;
    env.read_enum("kind", kind, [](const std::string& t) { return parse_env_kind(t); });
    c.run.env = EnvSpec::make(kind);
    env.read("max_steps", c.run.env.max_steps);
    env.read("reward_sd", c.run.env.reward_sd);
    env.finish();
  }
  {
    Section net = root.child("network");
    net.read("hidden", c.run.hidden);
    net.finish();
  }
  {
    SamplerConfig& s = c.run.sampler;
    Section sec = root.child("sampler");
    sec.read("eps0", s.eps0);
    sec.read_enum("decay", s.decay, parse_decay);
    sec.read("decay_power", s.decay_power);
    sec.read("pseudo_pop", s.pseudo_pop);
    sec.read("alpha", s.alpha);
    sec.read("sigma2", s.sigma2);
    sec.read("inner_steps", s.inner_steps);
    sec.read_enum("mode", s.mode, [](const std::string& t) { return parse_measurement_mode(t); });
    sec.read_enum("bootstrap", s.bootstrap, [](const std::string& t) { return parse_bootstrap(t); });
    sec.read("gamma", s.gamma);
    sec.read("momentum_damping", s.momentum_damping);
    Section prior = sec.child("prior");
    prior.read("lambda", s.prior.lambda);
    prior.read("sigma0", s.prior.sigma0);
    prior.read("sigma1", s.prior.sigma1);
    prior.finish();
    Section kova = sec.child("kova");
    kova.read("w_scale", s.kova.w_scale);
    kova.read("gamma_scale", s.kova.gamma_scale);
    kova.read("learning_rate", s.kova.learning_rate);
    kova.read("init_var", s.kova.init_var);
    kova.finish();
    Section adam = sec.child("adam");
    adam.read("lr", s.adam.lr);
    adam.read("beta1", s.adam.beta1);
    adam.read("beta2", s.adam.beta2);
    adam.read("eps", s.adam.eps);
    adam.finish();
    sec.finish();
  }
  {
    RunConfig& r = c.run;
    Section sec = root.child("runtime");
    sec.read("total_steps", r.total_steps);
    sec.read("train_freq", r.train_freq);
    sec.read("gradient_steps", r.gradient_steps);
    sec.read("batch_size", r.batch_size);
    sec.read("buffer_capacity", r.buffer_capacity);
    sec.read("learning_starts", r.learning_starts);
    sec.read("exploration_initial", r.exploration_initial);
    sec.read("exploration_fraction", r.exploration_fraction);
    sec.read("exploration_final", r.exploration_final);
    sec.read("target_update_interval", r.target_update_interval);
    sec.read("pool_size", r.pool_size);
    sec.read("eval_checkpoints", r.eval_checkpoints);
    sec.read("eval_episodes", r.eval_episodes);
    sec.read("on_policy", r.on_policy);
    sec.finish();
  }
  {
    Section sec = root.child("oracle");
    sec.read("eps_explore", c.oracle_eps);
    sec.read("gamma", c.oracle_gamma);
    sec.finish();
  }
  {
    Section sec = root.child("metrics");
    sec.read("level", c.level);
    sec.read("save_pool", c.save_pool);
    sec.finish();
  }
  root.finish();
  return c;
}

json to_json(const ExperimentConfig& c) {
  const RunConfig& r = c.run;
  const SamplerConfig& s = r.sampler;
  json doc;
  doc["name"] = c.name;
  doc["algorithm"] = c.algorithm;
  doc["engine"] = std::string(to_string(r.engine));
  doc["replicates"] = c.replicates;
  doc["seed_base"] = c.seed_base;
  doc["output_dir"] = c.output_dir;
  doc["env"] = {{"kind", std::string(to_string(r.env.kind))},
                {"max_steps", r.env.max_steps},
                {"reward_sd", r.env.reward_sd}};
  doc["network"] = {{"hidden", r.hidden}};
  doc["sampler"] = {
      {"eps0", s.eps0},
      {"decay", decay_name(s.decay)},
      {"decay_power", s.decay_power},
      {"pseudo_pop", s.pseudo_pop},
      {"alpha", s.alpha},
      {"sigma2", s.sigma2},
      {"inner_steps", s.inner_steps},
      {"mode", std::string(to_string(s.mode))},
      {"bootstrap", std::string(to_string(s.bootstrap))},
      {"gamma", s.gamma},
      {"momentum_damping", s.momentum_damping},
      {"prior", {{"lambda", s.prior.lambda},
                 {"sigma0", s.prior.sigma0},
                 {"sigma1", s.prior.sigma1}}},
      {"kova", {{"w_scale", s.kova.w_scale},
                {"gamma_scale", s.kova.gamma_scale},
                {"learning_rate", s.kova.learning_rate},
                {"init_var", s.kova.init_var}}},
      {"adam", {{"lr", s.adam.lr},
                {"beta1", s.adam.beta1},
                {"beta2", s.adam.beta2},
                {"eps", s.adam.eps}}}};
  doc["runtime"] = {{"total_steps", r.total_steps},
                    {"train_freq", r.train_freq},
                    {"gradient_steps", r.gradient_steps},
                    {"batch_size", r.batch_size},
                    {"buffer_capacity", r.buffer_capacity},
                    {"learning_starts", r.learning_starts},
                    {"exploration_initial", r.exploration_initial},
                    {"exploration_fraction", r.exploration_fraction},
                    {"exploration_final", r.exploration_final},
                    {"target_update_interval", r.target_update_interval},
                    {"pool_size", r.pool_size},
                    {"eval_checkpoints", r.eval_checkpoints},
                    {"eval_episodes", r.eval_episodes},
                    {"on_policy", r.on_policy}};
  doc["oracle"] = {{"eps_explore", c.oracle_eps}, {"gamma", c.oracle_gamma}};
  doc["metrics"] = {{"level", c.level}, {"save_pool", c.save_pool}};
  return doc;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string hidden_label(const std::vector<int>& hidden) {
  std::string out;
  for (std::size_t i = 0; i < hidden.size(); ++i) {
    if (i) out += 'x';
    out += std::to_string(hidden[i]);
  }
  return out.empty() ? "-" : out;
}

bool samples_posterior(Engine e) {
  return e == Engine::kLktd || e == Engine::kSgld || e == Engine::kSghmc;
}

std::string population_label(const ExperimentConfig& c) {
  return samples_posterior(c.run.engine) ? format_double(c.run.sampler.pseudo_pop)
                                         : "-";
}

/// Step size column of the report tables.
double step_size(const ExperimentConfig& c) {
  switch (c.run.engine) {
    case Engine::kAdamDqn: return c.run.sampler.adam.lr;
    case Engine::kKova: return c.run.sampler.kova.learning_rate;
    default: return c.run.sampler.eps0;
  }
}


}  // namespace

void ExperimentConfig::validate() const {
  run.validate();
  detail::require(replicates >= 1, "replicates must be >= 1");
  detail::require(!output_dir.empty(), "output_dir must not be empty");
  detail::require(oracle_eps >= 0.0 && oracle_eps < 1.0,
                  "oracle.eps_explore must lie in [0, 1)");
  detail::require(oracle_gamma > 0.0 && oracle_gamma <= 1.0,
                  "oracle.gamma must lie in (0, 1]");
  detail::require(level > 0.0 && level < 1.0, "metrics.level must lie in (0, 1)");
  for (char ch : name) {
    detail::require(ch != ',' && ch != '\n', "name must not contain commas");
  }
  for (char ch : algorithm) {
    detail::require(ch != ',' && ch != '\n', "algorithm must not contain commas");
  }
}

std::string ExperimentConfig::label() const {
  return algorithm.empty() ? std::string(to_string(run.engine)) : algorithm;
}

ExperimentConfig parse_config(const std::string& text,
                              const std::vector<std::string>& overrides) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config document must be an object");
  for (const std::string& o : overrides) apply_override(doc, o);
  ExperimentConfig config = from_json(doc);
  config.validate();
  return config;
}

ExperimentConfig load_config(const std::string& path,
                             const std::vector<std::string>& overrides) {
  return parse_config(read_file(path), overrides);
}

std::string serialize_config(const ExperimentConfig& config) {
  return to_json(config).dump(2) + "\n";
}

int replicate_threads() {
  if (const char* env = std::getenv("LKTD_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

ReplicateResult run_replicate(const ExperimentConfig& config, int index,
                              const QTable* oracle) {
  ReplicateResult result;
  result.index = index;
  result.seed = config.seed_base + static_cast<std::uint64_t>(index);
  RunConfig run = config.run;
  run.seed = result.seed;
  result.artifacts = train(run);
  const RunArtifacts& art = result.artifacts;
  if (oracle != nullptr && run.env.kind == EnvKind::kIndoorEscape &&
      art.pool.size() >= 2) {
    const IndoorPoolValues values = evaluate_indoor_pool(art.pool, art.network);
    result.has_pool_metrics = true;
    result.mse_north = mse_q(values, *oracle, kNorth);
    result.mse_east = mse_q(values, *oracle, kEast);
    result.coverage_north = coverage_rate(values, *oracle, config.level, {kNorth});
    result.coverage_east = coverage_rate(values, *oracle, config.level, {kEast});
    result.policy.resize(kGridSize * kGridSize, 4);
    for (int x = 0; x < kGridSize; ++x) {
      for (int y = 0; y < kGridSize; ++y) {
        for (int a = 0; a < 4; ++a) {
          result.policy(QTable::state(x, y), a) =
              mean_policy_probability(values, x, y, a);
        }
      }
    }
  }
  return result;
}

namespace {

CsvTable policy_table(const Eigen::MatrixXd& policy) {
  CsvTable t;
  t.header = {"x", "y", "action", "prob"};
  if (policy.size() == 0) return t;
  for (int x = 0; x < kGridSize; ++x) {
    for (int y = 0; y < kGridSize; ++y) {
      for (int a = 0; a < 4; ++a) {
        t.rows.push_back({std::to_string(x), std::to_string(y), std::string(indoor_action_name(a)),
                          format_double(policy(QTable::state(x, y), a))});
      }
    }
  }
  return t;
}

}  // namespace

int cmd_run(const ExperimentConfig& config, std::ostream& log) {
  config.validate();
  const fs::path out(config.output_dir);
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw IoError("cannot create " + out.string() + ": " + ec.message());

  std::optional<QTable> oracle;
  if (config.run.env.kind == EnvKind::kIndoorEscape) {
    oracle = grid_q_star_dp(config.oracle_eps, config.oracle_gamma);
  }

  std::vector<ReplicateResult> results(static_cast<std::size_t>(config.replicates));
  std::atomic<int> next{0};
  std::mutex log_mutex;
  std::exception_ptr error;
  auto worker = [&] {
    while (true) {
      const int k = next.fetch_add(1);
      if (k >= config.replicates) return;
      try {
        ReplicateResult r = run_replicate(config, k, oracle ? &*oracle : nullptr);
        const fs::path dir = out / ("replicate_" + std::to_string(k));
        fs::create_directories(dir);
        write_csv((dir / "policy_prob.csv").string(), policy_table(r.policy));
        if (config.save_pool) {
          write_pool((dir / "pool.bin").string(), r.artifacts.pool,
                     r.artifacts.network);
        }
        r.artifacts.pool = SamplePool(0);
        {
          std::lock_guard<std::mutex> lock(log_mutex);
          log << config.name << " replicate " << k << " seed " << r.seed
              << (r.artifacts.failed ? " FAILED: " + r.artifacts.failure : " done")
              << "\n";
        }
        results[static_cast<std::size_t>(k)] = std::move(r);
      } catch (...) {
        std::lock_guard<std::mutex> lock(log_mutex);
        if (!error) error = std::current_exception();
        next.store(config.replicates);
      }
    }
  };
  const int threads = std::min(replicate_threads(), config.replicates);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);

  {
    std::ofstream cfg(out / "config.json", std::ios::trunc);
    if (!cfg) throw IoError("cannot write config.json in " + out.string());
    cfg << serialize_config(config);
  }

  const std::string algorithm = config.label();
  const std::string population = population_label(config);
  CsvTable mse{{"run_id", "algorithm", "N", "action", "mse"}, {}};
  CsvTable coverage{{"run_id", "algorithm", "N", "action", "level", "coverage",
                     "mean_width"}, {}};
  CsvTable timing{{"algorithm", "hidden", "batch", "ms_per_update"}, {}};
  CsvTable rewards{{"step", "replicate", "train_reward", "eval_reward",
                    "best_reward"}, {}};
  Eigen::MatrixXd policy_sum;
  int policy_count = 0;
  double ms_total = 0.0;
  std::int64_t ms_updates = 0;
  int failed = 0;
  for (const ReplicateResult& r : results) {
    const std::string run_id = std::to_string(r.seed);
    if (r.artifacts.failed) ++failed;
    if (r.has_pool_metrics) {
      mse.rows.push_back({run_id, algorithm, population, "N", format_double(r.mse_north)});
      mse.rows.push_back({run_id, algorithm, population, "E", format_double(r.mse_east)});
      const std::string level = format_double(config.level);
      coverage.rows.push_back({run_id, algorithm, population, "N", level,
                               format_double(r.coverage_north.coverage),
                               format_double(r.coverage_north.mean_width)});
      coverage.rows.push_back({run_id, algorithm, population, "E", level,
                               format_double(r.coverage_east.coverage),
                               format_double(r.coverage_east.mean_width)});
      policy_sum = policy_count == 0 ? r.policy : Eigen::MatrixXd(policy_sum + r.policy);
      ++policy_count;
    }
    for (double ms : r.artifacts.update_ms) ms_total += ms;
    ms_updates += static_cast<std::int64_t>(r.artifacts.update_ms.size());
    for (const EvalRecord& e : r.artifacts.evaluations) {
      rewards.rows.push_back({std::to_string(e.step), std::to_string(r.index),
                              format_double(e.train_reward),
                              format_double(e.eval_reward),
                              format_double(e.best_reward)});
    }
  }
  if (ms_updates > 0) {
    timing.rows.push_back({algorithm, hidden_label(config.run.hidden),
                           std::to_string(config.run.batch_size),
                           format_double(ms_total / static_cast<double>(ms_updates))});
  }
  if (policy_count > 0) policy_sum /= static_cast<double>(policy_count);

  write_csv((out / "mse.csv").string(), mse);
  write_csv((out / "coverage.csv").string(), coverage);
  write_csv((out / "policy_prob.csv").string(), policy_table(policy_sum));
  write_csv((out / "timing.csv").string(), timing);
  write_csv((out / "rewards.csv").string(), rewards);

  if (failed > 0) {
    log << failed << " of " << config.replicates << " replicates aborted\n";
    return 1;
  }
  return 0;
}

void cmd_oracle(const OracleRequest& request) {
  if (parse_env_kind(request.env) != EnvKind::kIndoorEscape) {
    throw UsageError("no oracle Q-table for environment '" + request.env +
                     "'; only indoor_escape has one");
  }
  detail::require(!request.out_path.empty(), "oracle needs an output path");
  QTable table;
  if (request.method == OracleMethod::kDp) {
    table = grid_q_star_dp(request.eps, request.gamma);
  } else {
    Rng rng = make_stream(request.seed, StreamPurpose::kEnv);
    MonteCarloOptions options;
    options.episodes = request.episodes;
    options.reward_noise = request.reward_noise;
    table = grid_q_star_mc(request.eps, request.gamma, options, rng);
  }
  write_qtable_csv(request.out_path, table);
}

namespace {

std::string fixed5(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.5f", v);
  return buf;
}

struct Summary {
  double mean = std::nan("");
  double std = std::nan("");
  std::size_t kept = 0;
};

// Trimmed summary with fewer than 4 values falling back to the plain mean.
Summary summarize(const std::vector<double>& values) {
  Summary s;
  if (values.empty()) return s;
  if (values.size() >= 4) {
    const TrimmedSummary t = trimmed_mean_std(values);
    return {t.mean, t.std, t.kept};
  }
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.std = values.size() >= 2 ? std::sqrt(ss / static_cast<double>(values.size() - 1)) : 0.0;
  s.kept = values.size();
  return s;
}

std::string cell(const Summary& s) {
  return fixed5(s.mean) + " (" + fixed5(s.std) + ")";
}

}  // namespace

void cmd_report(const std::vector<std::string>& run_dirs,
                const std::string& out_dir) {
  if (run_dirs.empty()) throw UsageError("report needs at least one run directory");
  CsvTable summary{{"algorithm", "eps", "N", "metric", "action", "mean", "std",
                    "kept"}, {}};
  CsvTable table_mse{{"algorithm", "eps", "N", "mse_N", "mse_E"}, {}};
  CsvTable table_cov{{"algorithm", "eps", "N", "cr_N", "cr_E", "width_N",
                      "width_E"}, {}};
  CsvTable band{{"algorithm", "step", "series", "mean", "lower", "upper"}, {}};

  for (const std::string& dir : run_dirs) {
    const fs::path root(dir);
    if (!fs::exists(root / "config.json")) {
      throw UsageError(dir + " is not a run directory (no config.json)");
    }
    const ExperimentConfig config = load_config((root / "config.json").string());
    const std::string algorithm = config.label();
    const std::string eps = format_double(step_size(config));
    const std::string population = population_label(config);

    const CsvTable mse = read_csv((root / "mse.csv").string());
    const CsvTable cov = read_csv((root / "coverage.csv").string());
    const CsvTable rewards = read_csv((root / "rewards.csv").string());
    if (rewards.rows.empty() && mse.rows.empty()) {
      throw UsageError(dir + " holds no replicate results");
    }

    std::map<std::string, std::vector<double>> by_key;
    const std::size_t ma = mse.column("action"), mv = mse.column("mse");
    for (const auto& row : mse.rows) by_key["mse/" + row[ma]].push_back(parse_double(row[mv]));
    const std::size_t ca = cov.column("action"), cc = cov.column("coverage"),
                      cw = cov.column("mean_width");
    for (const auto& row : cov.rows) {
      by_key["coverage/" + row[ca]].push_back(parse_double(row[cc]));
      by_key["width/" + row[ca]].push_back(parse_double(row[cw]));
    }
    std::map<std::string, Summary> stats;
    for (const auto& [key, values] : by_key) {
      const Summary s = summarize(values);
      stats[key] = s;
      const auto slash = key.find('/');
      summary.rows.push_back({algorithm, eps, population, key.substr(0, slash),
                              key.substr(slash + 1), format_double(s.mean),
                              format_double(s.std), std::to_string(s.kept)});
    }
    if (!mse.rows.empty()) {
      table_mse.rows.push_back({algorithm, eps, population, cell(stats["mse/N"]),
                                cell(stats["mse/E"])});
      table_cov.rows.push_back({algorithm, eps, population,
                                cell(stats["coverage/N"]), cell(stats["coverage/E"]),
                                cell(stats["width/N"]), cell(stats["width/E"])});
    }

    // Reward curves per replicate on the shared checkpoint grid.
    const std::size_t rs = rewards.column("step"), rr = rewards.column("replicate");
    const char* series[] = {"train_reward", "eval_reward", "best_reward"};
    std::map<int, std::map<std::int64_t, std::array<double, 3>>> curves;
    for (const auto& row : rewards.rows) {
      auto& slot = curves[std::stoi(row[rr])][std::stoll(row[rs])];
      for (int i = 0; i < 3; ++i) slot[static_cast<std::size_t>(i)] =
          parse_double(row[rewards.column(series[i])]);
    }
    if (curves.size() >= 3) {
      std::vector<std::int64_t> steps;
      for (const auto& [step, _] : curves.begin()->second) steps.push_back(step);
      for (int i = 0; i < 3; ++i) {
        std::vector<std::vector<double>> matrix;
        for (const auto& [rep, points] : curves) {
          std::vector<double> c;
          for (std::int64_t step : steps) {
            const auto it = points.find(step);
            if (it == points.end()) {
              throw UsageError(dir + ": replicate " + std::to_string(rep) +
                               " has a different checkpoint grid");
            }
            c.push_back(it->second[static_cast<std::size_t>(i)]);
          }
          matrix.push_back(std::move(c));
        }
        const RewardBand b = reward_band(matrix, 0.05);
        const std::string name(series[i]);
        for (std::size_t t = 0; t < steps.size(); ++t) {
          band.rows.push_back({algorithm, std::to_string(steps[t]),
                               name.substr(0, name.find('_')),
                               format_double(b.mean[t]), format_double(b.lower[t]),
                               format_double(b.upper[t])});
        }
      }
    }
  }

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir + ": " + ec.message());
  const fs::path out(out_dir);
  write_csv((out / "summary.csv").string(), summary);
  write_csv((out / "table_mse.csv").string(), table_mse);
  write_csv((out / "table_coverage.csv").string(), table_cov);
  write_csv((out / "reward_band.csv").string(), band);
}

}  // namespace lktd

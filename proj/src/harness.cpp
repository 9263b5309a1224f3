// Copyright (c) 2026 cfesched contributors
// SPDX-License-Identifier: Apache-2.0

#include "cfe/harness.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>

#include "cfe/baselines.hpp"
#include "cfe/config.hpp"
#include "cfe/errors.hpp"

namespace cfe {

namespace {

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), format, v);
  return buf;
}

std::string fmt_range(const RealRange& r) {
  return fmt("%g", r.lo) + ", " + fmt("%g", r.hi);
}

RealRange range_from(const KeyValueFile& kv, const std::string& key,
                     RealRange fallback) {
  if (!kv.has(key)) return fallback;
  const std::vector<double> v = kv.get_double_list(key);
  if (v.size() != 2)
    throw ConfigError(kv.origin() + ": key `" + key +
                      "`: expected two values (lo, hi)");
  return {v[0], v[1]};
}

// Creates the output directory and drops the provenance echo into it.
void prepare_out(const ExperimentConfig& cfg) {
  std::filesystem::create_directories(cfg.out_dir);
  std::ofstream out(cfg.out_dir + "/config.txt", std::ios::binary);
  if (!out) throw ConfigError("cannot open for writing: " + cfg.out_dir + "/config.txt");
  out << (cfg.echo_text.empty() ? render_config(cfg) : cfg.echo_text);
}

double moving_average(const std::vector<EpisodeLog>& log, std::size_t end,
                      std::size_t window, double EpisodeLog::*field) {
  const std::size_t lo = end > window ? end - window : 0;
  double sum = 0.0;
  for (std::size_t i = lo; i < end; ++i) sum += log[i].*field;
  return sum / static_cast<double>(end - lo);
}

}  // namespace

ExperimentConfig ExperimentConfig::defaults() { return {}; }

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  const KeyValueFile kv = KeyValueFile::parse_file(path);
  static const std::set<std::string> known = {
      "infra", "mode", "out",
      "train.seed", "train.episodes",
      "eval.seed", "eval.count_per_level",
      "gen.workload_mi", "gen.memory_mb", "gen.output_mb",
      "hp.gamma", "hp.tau", "hp.batch_size", "hp.buffer_capacity",
      "hp.learning_rate", "hp.clip_norm", "hp.hidden",
      "hp.noise_std", "hp.noise_decay", "hp.noise_floor",
      "reward.makespan_weight", "reward.makespan_target_s",
      "reward.beta1", "reward.beta2"};
  for (const auto& [key, value] : kv.entries())
    if (!known.contains(key))
      throw ConfigError(kv.origin() + ": unknown key `" + key + "`");

  ExperimentConfig cfg;
  cfg.echo_text = kv.raw_text();
  cfg.infra_source = kv.get_string("infra", "builtin");
  cfg.infra = cfg.infra_source == "builtin"
                  ? Infrastructure::builtin_default()
                  : Infrastructure::load(cfg.infra_source);
  cfg.mode = memory_mode_from_string(kv.get_string("mode", "persistent"));
  cfg.out_dir = kv.get_string("out", cfg.out_dir);
  cfg.train_seed = kv.get_uint("train.seed", cfg.train_seed);
  cfg.hp.episodes =
      static_cast<int>(kv.get_int("train.episodes", cfg.hp.episodes));
  cfg.eval_seed = kv.get_uint("eval.seed", cfg.eval_seed);
  cfg.eval_count_per_level = static_cast<int>(
      kv.get_int("eval.count_per_level", cfg.eval_count_per_level));
  if (cfg.eval_count_per_level <= 0)
    throw ConfigError(kv.origin() + ": eval.count_per_level must be positive");
  cfg.gen.workload_mi = range_from(kv, "gen.workload_mi", cfg.gen.workload_mi);
  cfg.gen.memory_mb = range_from(kv, "gen.memory_mb", cfg.gen.memory_mb);
  cfg.gen.output_mb = range_from(kv, "gen.output_mb", cfg.gen.output_mb);
  cfg.hp.gamma = kv.get_double("hp.gamma", cfg.hp.gamma);
  cfg.hp.tau = kv.get_double("hp.tau", cfg.hp.tau);
  cfg.hp.batch_size =
      static_cast<int>(kv.get_int("hp.batch_size", cfg.hp.batch_size));
  cfg.hp.buffer_capacity = kv.get_uint("hp.buffer_capacity", cfg.hp.buffer_capacity);
  cfg.hp.learning_rate = kv.get_double("hp.learning_rate", cfg.hp.learning_rate);
  cfg.hp.clip_norm = kv.get_double("hp.clip_norm", cfg.hp.clip_norm);
  if (kv.has("hp.hidden")) {
    cfg.hp.hidden.clear();
    for (double h : kv.get_double_list("hp.hidden"))
      cfg.hp.hidden.push_back(static_cast<int>(h));
  }
  cfg.hp.noise_std = kv.get_double("hp.noise_std", cfg.hp.noise_std);
  cfg.hp.noise_decay = kv.get_double("hp.noise_decay", cfg.hp.noise_decay);
  cfg.hp.noise_floor = kv.get_double("hp.noise_floor", cfg.hp.noise_floor);
  cfg.reward.makespan_weight =
      kv.get_double("reward.makespan_weight", cfg.reward.makespan_weight);
  cfg.reward.makespan_target_s =
      kv.get_double("reward.makespan_target_s", cfg.reward.makespan_target_s);
  cfg.reward.beta1 = kv.get_double("reward.beta1", cfg.reward.beta1);
  cfg.reward.beta2 = kv.get_double("reward.beta2", cfg.reward.beta2);
  cfg.hp.validate();
  cfg.gen.validate();
  return cfg;
}

std::string render_config(const ExperimentConfig& cfg) {
  std::string s;
  s += "infra = " + cfg.infra_source + "\n";
  s += std::string("mode = ") + to_string(cfg.mode) + "\n";
  s += "out = " + cfg.out_dir + "\n";
  s += "train.seed = " + std::to_string(cfg.train_seed) + "\n";
  s += "train.episodes = " + std::to_string(cfg.hp.episodes) + "\n";
  s += "eval.seed = " + std::to_string(cfg.eval_seed) + "\n";
  s += "eval.count_per_level = " + std::to_string(cfg.eval_count_per_level) + "\n";
  s += "gen.workload_mi = " + fmt_range(cfg.gen.workload_mi) + "\n";
  s += "gen.memory_mb = " + fmt_range(cfg.gen.memory_mb) + "\n";
  s += "gen.output_mb = " + fmt_range(cfg.gen.output_mb) + "\n";
  s += "hp.gamma = " + fmt("%g", cfg.hp.gamma) + "\n";
  s += "hp.tau = " + fmt("%g", cfg.hp.tau) + "\n";
  s += "hp.batch_size = " + std::to_string(cfg.hp.batch_size) + "\n";
  s += "hp.buffer_capacity = " + std::to_string(cfg.hp.buffer_capacity) + "\n";
  s += "hp.learning_rate = " + fmt("%g", cfg.hp.learning_rate) + "\n";
  s += "hp.clip_norm = " + fmt("%g", cfg.hp.clip_norm) + "\n";
  s += "hp.hidden =";
  for (std::size_t i = 0; i < cfg.hp.hidden.size(); ++i)
    s += (i ? ", " : " ") + std::to_string(cfg.hp.hidden[i]);
  s += "\n";
  s += "hp.noise_std = " + fmt("%g", cfg.hp.noise_std) + "\n";
  s += "hp.noise_decay = " + fmt("%g", cfg.hp.noise_decay) + "\n";
  s += "hp.noise_floor = " + fmt("%g", cfg.hp.noise_floor) + "\n";
  s += "reward.makespan_weight = " + fmt("%g", cfg.reward.makespan_weight) + "\n";
  s += "reward.makespan_target_s = " + fmt("%g", cfg.reward.makespan_target_s) + "\n";
  s += "reward.beta1 = " + fmt("%g", cfg.reward.beta1) + "\n";
  s += "reward.beta2 = " + fmt("%g", cfg.reward.beta2) + "\n";
  return s;
}

std::array<std::vector<Workflow>, kLevels.size()> eval_corpora(
    const ExperimentConfig& cfg) {
  std::array<std::vector<Workflow>, kLevels.size()> out;
  for (std::size_t l = 0; l < kLevels.size(); ++l) {
    GenSpec spec = cfg.gen;
    spec.level = kLevels[l];
    spec.seed = cfg.eval_seed;
    spec.count = cfg.eval_count_per_level;
    out[l] = generate_corpus(spec);
  }
  return out;
}

std::vector<EvalRow> evaluate_policy(const ExperimentConfig& cfg,
                                     const std::string& policy,
                                     const std::vector<Workflow>& corpus,
                                     const PolicyBundle* bundle) {
  std::vector<EvalRow> rows;
  rows.reserve(corpus.size());
  Env env(cfg.infra, cfg.mode, cfg.reward);
  SplitMix64 rng(cfg.eval_seed);  // consumed by the random baseline only

  for (const Workflow& wf : corpus) {
    EpisodeResult er;
    if (policy == "random") {
      er = run_episode(env, wf,
                       [&](const Env& e) { return random_select(e, rng); });
    } else if (policy == "fcfs") {
      FcfsCursor cursor;
      er = run_episode(env, wf,
                       [&](const Env& e) { return fcfs_select(e, cursor); });
    } else if (policy == "greedy") {
      er = run_episode(env, wf,
                       [](const Env& e) { return greedy_select(e); });
    } else if (policy == "heft") {
      try {
        er.trace = heft_schedule(wf, cfg.infra, cfg.mode);
        er.makespan_s = makespan(er.trace, wf);
      } catch (const SchedulingError&) {
        er.feasible = false;
      }
    } else if (policy == "ddpg") {
      if (bundle == nullptr)
        throw ConfigError("policy `ddpg` needs a checkpoint");
      er = run_policy_episode(env, wf, *bundle);
    } else if (policy == "oracle") {
      const OracleResult opt = oracle_optimal(wf, cfg.infra, cfg.mode);
      er.trace = opt.trace;
      er.makespan_s = opt.makespan_s;
    } else {
      throw ConfigError("unknown policy: " + policy);
    }
    if (er.feasible)  // replay check: memory-honest, cost-exact
      validate_trace(er.trace, wf, cfg.infra, cfg.mode);
    rows.push_back({wf.id, wf.level, policy, er.makespan_s, er.feasible});
  }
  return rows;
}

void write_eval_csv(const std::vector<EvalRow>& rows, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open for writing: " + path);
  out << "workflow_id,level,policy,makespan_s,feasible\n";
  char buf[64];
  for (const EvalRow& r : rows) {
    std::snprintf(buf, sizeof(buf), "%.9f", r.makespan_s);
    out << r.workflow_id << ',' << to_string(r.level) << ',' << r.policy << ','
        << buf << ',' << (r.feasible ? "true" : "false") << '\n';
  }
  if (!out) throw ConfigError("write failed: " + path);
}

TrainSummary cmd_train(const ExperimentConfig& cfg) {
  prepare_out(cfg);
  SplitMix64 init_rng = substream(cfg.train_seed, 0, 1);
  PolicyBundle bundle = PolicyBundle::make(cfg.infra, cfg.hp, init_rng);
  const TrainResult result =
      train(bundle, cfg.infra, cfg.hp, cfg.reward, cfg.mode,
            mixed_level_sampler(cfg.train_seed, cfg.gen), cfg.train_seed);

  TrainSummary summary;
  summary.curve_path = cfg.out_dir + "/learning_curve.csv";
  summary.checkpoint_path = cfg.out_dir + "/checkpoint.txt";
  write_learning_curve_csv(result.episodes, summary.curve_path);
  save_bundle(summary.checkpoint_path, bundle);
  const std::size_t n = result.episodes.size();
  if (n > 0) {
    summary.final_ma_reward =
        moving_average(result.episodes, n, 50, &EpisodeLog::reward_sum);
    summary.final_ma_makespan =
        moving_average(result.episodes, n, 50, &EpisodeLog::makespan_s);
  }
  for (const EpisodeLog& e : result.episodes)
    if (e.failed) ++summary.failed_episodes;
  return summary;
}

std::vector<EvalRow> cmd_evaluate(const ExperimentConfig& cfg,
                                  const std::string& checkpoint_path,
                                  std::optional<Level> only_level) {
  const PolicyBundle bundle = load_bundle(checkpoint_path, cfg.infra, cfg.hp);
  const auto corpora = eval_corpora(cfg);
  prepare_out(cfg);
  std::vector<EvalRow> rows;
  for (std::size_t l = 0; l < kLevels.size(); ++l) {
    if (only_level && *only_level != kLevels[l]) continue;
    const auto level_rows = evaluate_policy(cfg, "ddpg", corpora[l], &bundle);
    rows.insert(rows.end(), level_rows.begin(), level_rows.end());
  }
  write_eval_csv(rows, cfg.out_dir + "/evaluation.csv");
  return rows;
}

std::vector<CompareRow> cmd_compare(const ExperimentConfig& cfg,
                                    const std::string& checkpoint_path) {
  const PolicyBundle bundle = load_bundle(checkpoint_path, cfg.infra, cfg.hp);
  const auto corpora = eval_corpora(cfg);
  prepare_out(cfg);

  std::vector<CompareRow> rows;
  for (std::size_t l = 0; l < kLevels.size(); ++l) {
    const auto& corpus = corpora[l];
    bool oracle_ok = true;
    for (const Workflow& wf : corpus)
      oracle_ok = oracle_ok &&
                  static_cast<int>(wf.tasks.size()) <= kOracleMaxTasks;

    std::vector<std::string> policies(kComparePolicies.begin(),
                                      kComparePolicies.end());
    if (oracle_ok) policies.emplace_back("oracle");

    std::map<std::string, CompareRow> by_policy;
    for (const std::string& policy : policies) {
      const auto eval_rows = evaluate_policy(cfg, policy, corpus, &bundle);
      CompareRow row;
      row.level = kLevels[l];
      row.policy = policy;
      double sum = 0.0;
      int completed = 0;
      for (const EvalRow& r : eval_rows) {
        if (!r.feasible) {
          ++row.failures;
          continue;
        }
        sum += r.makespan_s;
        ++completed;
      }
      row.mean_makespan_s = completed > 0 ? sum / completed : 0.0;
      by_policy[policy] = row;
    }
    const double ddpg_mean = by_policy["ddpg"].mean_makespan_s;
    for (const std::string& policy : policies) {
      CompareRow row = by_policy[policy];
      row.gap_pct = row.mean_makespan_s > 0.0
                        ? (row.mean_makespan_s - ddpg_mean) /
                              row.mean_makespan_s * 100.0
                        : 0.0;
      rows.push_back(row);
    }
  }

  const std::string path = cfg.out_dir + "/comparison.csv";
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open for writing: " + path);
  out << "# gap_pct = (policy mean - ddpg mean) / policy mean * 100; means "
         "are over completed workflows\n";
  out << "level,policy,mean_makespan_s,failures,gap_pct\n";
  char buf[64];
  for (const CompareRow& r : rows) {
    out << to_string(r.level) << ',' << r.policy << ',';
    std::snprintf(buf, sizeof(buf), "%.9f", r.mean_makespan_s);
    out << buf << ',' << r.failures << ',';
    std::snprintf(buf, sizeof(buf), "%.4f", r.gap_pct);
    out << buf << '\n';
  }
  if (!out) throw ConfigError("write failed: " + path);
  return rows;
}

std::string cmd_generate(const ExperimentConfig& cfg,
                         std::optional<Level> only_level, std::uint64_t seed,
                         int count_per_level) {
  prepare_out(cfg);
  std::vector<Workflow> all;
  for (Level level : kLevels) {
    if (only_level && *only_level != level) continue;
    GenSpec spec = cfg.gen;
    spec.level = level;
    spec.seed = seed;
    spec.count = count_per_level;
    const auto corpus = generate_corpus(spec);
    all.insert(all.end(), corpus.begin(), corpus.end());
  }
  const std::string path = cfg.out_dir + "/corpus.csv";
  save_workflows(all, path);
  return path;
}

std::vector<EvalRow> cmd_oracle(const ExperimentConfig& cfg, Level level) {
  GenSpec spec = cfg.gen;
  spec.level = level;
  spec.seed = cfg.eval_seed;
  spec.count = cfg.eval_count_per_level;
  const auto corpus = generate_corpus(spec);
  for (const Workflow& wf : corpus)
    if (static_cast<int>(wf.tasks.size()) > kOracleMaxTasks)
      throw ConfigError("workflow " + wf.id + " has " +
                        std::to_string(wf.tasks.size()) +
                        " tasks; the exact solver is limited to " +
                        std::to_string(kOracleMaxTasks));
  prepare_out(cfg);
  const auto rows = evaluate_policy(cfg, "oracle", corpus, nullptr);
  write_eval_csv(rows, cfg.out_dir + "/oracle.csv");
  return rows;
}

}  // namespace cfe

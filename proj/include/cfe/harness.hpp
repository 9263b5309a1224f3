// Copyright (c) 2026 cfesched contributors
// SPDX-License-Identifier: Apache-2.0
//
// Experiment orchestration behind the CLI: resolved run configuration,
// seeded evaluation corpora, policy evaluation, and the train / evaluate /
// compare / generate / oracle commands with schema-stable CSV outputs.

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cfe/ddpg.hpp"
#include "cfe/env.hpp"
#include "cfe/model.hpp"
#include "cfe/workload.hpp"

namespace cfe {

// Every knob a run needs, resolved up front. `echo_text` is written into the
// output directory for provenance: the config file bytes verbatim when one
// was given, otherwise a rendering of the effective defaults.
struct ExperimentConfig {
  Infrastructure infra = Infrastructure::builtin_default();
  std::string infra_source = "builtin";  // "builtin" or the file it came from
  Hyperparams hp;
  RewardConfig reward;
  MemoryMode mode = MemoryMode::persistent;
  std::uint64_t train_seed = 42;
  std::uint64_t eval_seed = 1337;  // held out from training
  int eval_count_per_level = 50;
  GenSpec gen;  // attribute ranges; level/seed/count are set per use
  std::string out_dir = "out";
  std::string echo_text;

  static ExperimentConfig defaults();
  static ExperimentConfig load(const std::string& path);
};

// Canonical `key = value` rendering of a config (also the echo fallback).
std::string render_config(const ExperimentConfig& cfg);

// 50-per-level (by default) held-out corpora from the evaluation seed.
std::array<std::vector<Workflow>, kLevels.size()> eval_corpora(
    const ExperimentConfig& cfg);

struct EvalRow {
  std::string workflow_id;
  Level level = Level::L1;
  std::string policy;
  double makespan_s = 0.0;
  bool feasible = true;
};

inline constexpr std::array<const char*, 5> kComparePolicies = {
    "random", "fcfs", "greedy", "heft", "ddpg"};

// Runs `policy` (one of random/fcfs/greedy/heft/ddpg/oracle) across the
// corpus; every complete trace is replay-validated before the row is
// emitted. `bundle` is only needed for ddpg.
std::vector<EvalRow> evaluate_policy(const ExperimentConfig& cfg,
                                     const std::string& policy,
                                     const std::vector<Workflow>& corpus,
                                     const PolicyBundle* bundle);

void write_eval_csv(const std::vector<EvalRow>& rows, const std::string& path);

struct TrainSummary {
  std::string curve_path;
  std::string checkpoint_path;
  double final_ma_reward = 0.0;    // 50-episode moving averages at the end
  double final_ma_makespan = 0.0;
  int failed_episodes = 0;
};

// Trains from scratch; writes learning_curve.csv, checkpoint.txt and the
// config echo into cfg.out_dir.
TrainSummary cmd_train(const ExperimentConfig& cfg);

// Noise-free rollouts of a checkpoint over the held-out corpora (optionally
// one level); writes evaluation.csv.
std::vector<EvalRow> cmd_evaluate(const ExperimentConfig& cfg,
                                  const std::string& checkpoint_path,
                                  std::optional<Level> only_level);

struct CompareRow {
  Level level = Level::L1;
  std::string policy;
  double mean_makespan_s = 0.0;  // over completed workflows
  int failures = 0;              // episodes that hit a scheduling dead end
  double gap_pct = 0.0;  // (policy mean - ddpg mean) / policy mean * 100
};

// Mean makespan per (level, policy) for the baselines and the checkpointed
// policy, plus the exact optimum on levels where every workflow passes the
// oracle size gate; writes comparison.csv.
std::vector<CompareRow> cmd_compare(const ExperimentConfig& cfg,
                                    const std::string& checkpoint_path);

// Writes a generated corpus (one level, or all four) to corpus.csv.
std::string cmd_generate(const ExperimentConfig& cfg,
                         std::optional<Level> only_level, std::uint64_t seed,
                         int count_per_level);

// Exact optimal makespans over a freshly generated corpus; every workflow
// must pass the oracle size gate. Writes oracle.csv.
std::vector<EvalRow> cmd_oracle(const ExperimentConfig& cfg, Level level);

}  // namespace cfe

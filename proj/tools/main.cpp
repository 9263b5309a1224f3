// Copyright (c) 2026 cfesched contributors
// SPDX-License-Identifier: Apache-2.0
//
// cfesched: workflow-scheduling experiments on a simulated
// cloud-fog-edge infrastructure.

#include <cstdint>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "cfe/errors.hpp"
#include "cfe/harness.hpp"
#include "cfe/model.hpp"

namespace {

cfe::ExperimentConfig resolve_config(const std::string& config_path,
                                     const std::string& out_dir,
                                     const std::string& mode) {
  cfe::ExperimentConfig cfg = config_path.empty()
                                  ? cfe::ExperimentConfig::defaults()
                                  : cfe::ExperimentConfig::load(config_path);
  if (!out_dir.empty()) cfg.out_dir = out_dir;
  if (!mode.empty()) cfg.mode = cfe::memory_mode_from_string(mode);
  return cfg;
}

cfe::Level parse_level(const std::string& s) {
  const auto level = cfe::level_from_string(s);
  if (!level)
    throw cfe::ConfigError("bad level `" + s + "` (expected L1..L4)");
  return *level;
}

void add_common(CLI::App* cmd, std::string& config_path, std::string& out_dir,
                std::string& mode) {
  cmd->add_option("--config", config_path, "run configuration file");
  cmd->add_option("--out", out_dir, "output directory");
  cmd->add_option("--mode", mode, "memory mode: persistent|transient");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"workflow scheduling experiments on a simulated "
               "cloud-fog-edge infrastructure"};
  app.require_subcommand(1);

  std::string config_path, out_dir, mode, level, checkpoint;
  std::uint64_t seed = 0;
  int episodes = -1;
  int count = -1;

  CLI::App* generate =
      app.add_subcommand("generate", "write a seeded workflow corpus");
  add_common(generate, config_path, out_dir, mode);
  generate->add_option("--seed", seed, "corpus seed (default: eval seed)");
  generate->add_option("--level", level, "only this level (L1..L4)");
  generate->add_option("--count", count, "workflows per level");

  CLI::App* train =
      app.add_subcommand("train", "train the two-tier scheduler");
  add_common(train, config_path, out_dir, mode);
  train->add_option("--seed", seed, "training seed");
  train->add_option("--episodes", episodes, "episode count");

  CLI::App* evaluate = app.add_subcommand(
      "evaluate", "noise-free rollouts of a checkpoint on held-out corpora");
  add_common(evaluate, config_path, out_dir, mode);
  evaluate->add_option("--seed", seed, "evaluation corpus seed");
  evaluate->add_option("--level", level, "only this level (L1..L4)");
  evaluate->add_option("--checkpoint", checkpoint, "trained policy bundle")
      ->required();

  CLI::App* compare = app.add_subcommand(
      "compare", "mean makespan of every scheduler on held-out corpora");
  add_common(compare, config_path, out_dir, mode);
  compare->add_option("--seed", seed, "evaluation corpus seed");
  compare->add_option("--checkpoint", checkpoint, "trained policy bundle")
      ->required();

  CLI::App* oracle = app.add_subcommand(
      "oracle", "exact optimal makespans on a small-instance corpus");
  add_common(oracle, config_path, out_dir, mode);
  oracle->add_option("--seed", seed, "corpus seed (default: eval seed)");
  oracle->add_option("--level", level, "level to solve (default: L1)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    cfe::ExperimentConfig cfg = resolve_config(config_path, out_dir, mode);

    if (app.got_subcommand(generate)) {
      const std::uint64_t corpus_seed =
          generate->count("--seed") ? seed : cfg.eval_seed;
      const int per_level = count > 0 ? count : cfg.eval_count_per_level;
      std::optional<cfe::Level> only;
      if (!level.empty()) only = parse_level(level);
      const std::string path = cfe::cmd_generate(cfg, only, corpus_seed, per_level);
      std::cout << "wrote " << path << '\n';
      return 0;
    }

    if (app.got_subcommand(train)) {
      if (train->count("--seed")) cfg.train_seed = seed;
      if (episodes >= 0) cfg.hp.episodes = episodes;
      const cfe::TrainSummary s = cfe::cmd_train(cfg);
      std::printf("episodes: %d  failed: %d\n", cfg.hp.episodes,
                  s.failed_episodes);
      std::printf("final 50-episode moving average: reward %.4f, makespan %.4f s\n",
                  s.final_ma_reward, s.final_ma_makespan);
      std::cout << "wrote " << s.curve_path << '\n';
      std::cout << "wrote " << s.checkpoint_path << '\n';
      return 0;
    }

    if (app.got_subcommand(evaluate)) {
      if (evaluate->count("--seed")) cfg.eval_seed = seed;
      std::optional<cfe::Level> only;
      if (!level.empty()) only = parse_level(level);
      const auto rows = cfe::cmd_evaluate(cfg, checkpoint, only);
      std::cout << "wrote " << rows.size() << " rows to " << cfg.out_dir
                << "/evaluation.csv\n";
      return 0;
    }

    if (app.got_subcommand(compare)) {
      if (compare->count("--seed")) cfg.eval_seed = seed;
      const auto rows = cfe::cmd_compare(cfg, checkpoint);
      std::printf("%-6s %-8s %16s %9s %9s\n", "level", "policy",
                  "mean_makespan_s", "failures", "gap_pct");
      for (const auto& r : rows)
        std::printf("%-6s %-8s %16.6f %9d %9.2f\n", cfe::to_string(r.level),
                    r.policy.c_str(), r.mean_makespan_s, r.failures, r.gap_pct);
      std::cout << "wrote " << cfg.out_dir << "/comparison.csv\n";
      return 0;
    }

    if (app.got_subcommand(oracle)) {
      if (oracle->count("--seed")) cfg.eval_seed = seed;
      const cfe::Level only = level.empty() ? cfe::Level::L1 : parse_level(level);
      const auto rows = cfe::cmd_oracle(cfg, only);
      double sum = 0.0;
      for (const auto& r : rows) sum += r.makespan_s;
      std::printf("optimal mean makespan over %zu workflows: %.6f s\n",
                  rows.size(), rows.empty() ? 0.0 : sum / rows.size());
      std::cout << "wrote " << cfg.out_dir << "/oracle.csv\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  std::cerr << "error: no subcommand\n";
  return 2;
}

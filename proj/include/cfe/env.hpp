// Copyright (c) 2026 cfesched contributors
// SPDX-License-Identifier: Apache-2.0
//
// Episode environment for one sequential workflow: feasibility masking,
// deterministic transition, reward shaping, and makespan accounting.

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "cfe/model.hpp"

namespace cfe {

// Whether a task's memory reservation is held until episode end (persistent,
// the default: creates inter-task coupling that makes myopic schedulers
// suboptimal) or scoped to the task itself (transient: every decision sees
// full node memory, which decouples the per-task costs entirely).
enum class MemoryMode { persistent, transient };

const char* to_string(MemoryMode mode);
MemoryMode memory_mode_from_string(const std::string& s);  // throws ConfigError

struct RewardConfig {
  double makespan_weight = 0.98;
  double makespan_target_s = 1.3;
  double beta1 = 0.5;  // completion bonus coefficient
  double beta2 = 0.1;  // compute-fraction efficiency coefficient
};

// -weight * cost/target + beta1 * [done] + beta2 * exec/cost.
// cost == 0 degenerates to a pure-compute step; the efficiency ratio is 1.
double reward(double cost_s, double exec_s, bool done, const RewardConfig& cfg);

struct TraceEntry {
  int task_id = 0;
  int node_id = 0;
  double cost_s = 0.0;

  bool operator==(const TraceEntry&) const = default;
};

struct ScheduleTrace {
  std::vector<TraceEntry> entries;

  bool operator==(const ScheduleTrace&) const = default;
};

// Total completion time of a complete trace (one entry per task, ids 1..T in
// order). Throws ConfigError if the trace does not cover the workflow.
double makespan(const ScheduleTrace& trace, const Workflow& workflow);

// Replays a trace against a fresh memory ledger and verifies that every entry
// was feasible when assigned and that every cost matches the cost model
// exactly. Throws ConfigError on any violation; returns the makespan.
double validate_trace(const ScheduleTrace& trace, const Workflow& workflow,
                      const Infrastructure& infra, MemoryMode mode);

// Scale used to squash task features into [0,1]; defaults mirror the
// generator's default attribute ranges.
struct FeatureScale {
  double workload_mi = 4000.0;
  double memory_mb = 2048.0;
  double output_mb = 50.0;
};

inline constexpr int kGlobalStateDim = 12;

class Env {
 public:
  Env(const Infrastructure& infra, MemoryMode mode = MemoryMode::persistent,
      RewardConfig reward_cfg = {}, FeatureScale scale = {});

  const Infrastructure& infra() const { return *infra_; }
  MemoryMode memory_mode() const { return mode_; }
  const RewardConfig& reward_config() const { return reward_cfg_; }

  // Begins an episode: full memory everywhere, idle nodes, zero traffic.
  void reset(const Workflow& workflow);

  bool done() const { return task_index_ >= task_count(); }
  int task_count() const { return static_cast<int>(workflow_.tasks.size()); }
  int current_task_index() const { return task_index_; }  // 0-based
  const Task& current_task() const;
  const Workflow& workflow() const { return workflow_; }

  double residual_memory_mb(int node_id) const;
  double available_at_s(int node_id) const;
  double elapsed_makespan_s() const { return elapsed_s_; }

  // Node ids in `layer` whose residual memory admits the current task
  // (inclusive bound: memory == residual is feasible).
  std::vector<int> feasible_nodes(Layer layer) const;
  bool layer_feasible(Layer layer) const;
  bool any_feasible() const;

  struct StepResult {
    double reward = 0.0;
    double cost_s = 0.0;
    bool done = false;
  };

  // Assigns the current task to `node_id`. The node must be feasible; an
  // infeasible node is a caller bug and is rejected, masking is the caller's
  // job. Throws std::logic_error on contract violations.
  StepResult step(Layer layer, int node_id);

  const ScheduleTrace& trace() const { return trace_; }

  // Layer-aggregate view: mean normalized queue per layer (x3), free-memory
  // fraction per layer (x3), normalized shipped traffic per link (x2),
  // task features (x3), fraction of tasks remaining (x1). All in [0,1].
  std::array<double, kGlobalStateDim> global_state() const;

  // Node-level view for one layer: per node (free-memory fraction,
  // normalized availability, normalized capacity), then task features.
  // Dimension 3*|N_layer| + 3.
  std::vector<double> local_state(Layer layer) const;
  int local_state_dim(Layer layer) const;

  // Bit i set <=> the i-th node of `layer` (ascending id) is feasible now.
  std::uint32_t feasible_mask(Layer layer) const;

 private:
  double norm_avail(double avail_s) const;
  std::array<double, 3> task_features() const;

  const Infrastructure* infra_;
  MemoryMode mode_;
  RewardConfig reward_cfg_;
  FeatureScale scale_;

  Workflow workflow_;
  std::vector<double> residual_mb_;   // per node, id-1 indexed
  std::vector<double> available_s_;   // per node cumulative assigned cost
  std::array<double, 2> link_traffic_mb_{};  // edge->fog, fog->cloud
  double total_output_mb_ = 0.0;
  int task_index_ = 0;
  double elapsed_s_ = 0.0;
  ScheduleTrace trace_;
};

// Trace CSV: `task_id,layer,node_id,cost_s,cum_makespan_s`.
void write_trace_csv(const ScheduleTrace& trace, const Infrastructure& infra,
                     const std::string& path);

}  // namespace cfe

// Copyright (c) 2026 cfesched contributors
// SPDX-License-Identifier: Apache-2.0
//
// Comparison schedulers: random, round-robin FCFS, myopic greedy, HEFT list
// scheduling, and an exact branch-and-bound oracle for small instances.

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "cfe/env.hpp"
#include "cfe/model.hpp"
#include "cfe/rng.hpp"

namespace cfe {

struct Decision {
  Layer layer = Layer::edge;
  int node_id = 0;
};

// Uniform over the union of feasible nodes across all layers.
// Throws SchedulingError when nothing is feasible anywhere.
Decision random_select(const Env& env, SplitMix64& rng);

// Round-robin cursor over node ids 1..N (edge block, then fog, then cloud),
// skipping infeasible nodes; the cursor advances past the chosen node.
struct FcfsCursor {
  int next_index = 0;  // 0-based position in the fixed node order
};
Decision fcfs_select(const Env& env, FcfsCursor& cursor);

// Argmin of the immediate assignment cost over all feasible nodes; ties go to
// the lowest node id.
Decision greedy_select(const Env& env);

// Chain upward ranks: rank(i) = mean exec time over all nodes + mean transfer
// cost over the three layer paths + rank(i+1). Monotonically decreasing along
// the chain, so rank order equals chain order.
std::vector<double> heft_upward_ranks(const Workflow& workflow,
                                      const Infrastructure& infra);

// Offline HEFT adapted to a sequential chain: tasks in decreasing rank order,
// each placed on the feasible node with the earliest finish time under the
// given memory mode. Throws SchedulingError when a task has no feasible node.
ScheduleTrace heft_schedule(const Workflow& workflow,
                            const Infrastructure& infra, MemoryMode mode);

struct OracleResult {
  ScheduleTrace trace;
  double makespan_s = 0.0;
};

// Exact minimum-makespan assignment by depth-first branch and bound with an
// admissible bound (suffix sums of per-task unconstrained minima). Refuses
// instances with more than kOracleMaxTasks tasks.
inline constexpr int kOracleMaxTasks = 9;
OracleResult oracle_optimal(const Workflow& workflow,
                            const Infrastructure& infra, MemoryMode mode);

// Rolls one policy through a full episode.
struct EpisodeResult {
  ScheduleTrace trace;
  double makespan_s = 0.0;
  double reward_sum = 0.0;
  bool feasible = true;  // false when the policy ran out of feasible nodes
};

using PolicyFn = std::function<Decision(const Env&)>;

EpisodeResult run_episode(Env& env, const Workflow& workflow,
                          const PolicyFn& policy);

}  // namespace cfe

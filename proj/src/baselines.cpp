// Copyright (c) 2026 cfesched contributors
// SPDX-License-Identifier: Apache-2.0

#include "cfe/baselines.hpp"

#include <algorithm>
#include <cassert>
#include <limits>

#include "cfe/errors.hpp"

namespace cfe {

Decision random_select(const Env& env, SplitMix64& rng) {
  std::vector<int> pool;
  for (Layer layer : kLayers) {
    const auto ids = env.feasible_nodes(layer);
    pool.insert(pool.end(), ids.begin(), ids.end());
  }
  if (pool.empty())
    throw SchedulingError("random: no feasible node for task " +
                          std::to_string(env.current_task().id));
  const int node_id =
      pool[rng.uniform_int(0, static_cast<std::uint64_t>(pool.size()) - 1)];
  return {env.infra().node(node_id).layer, node_id};
}

Decision fcfs_select(const Env& env, FcfsCursor& cursor) {
  const int n = env.infra().node_count();
  const Task& task = env.current_task();
  for (int probe = 0; probe < n; ++probe) {
    const int index = (cursor.next_index + probe) % n;
    const int node_id = index + 1;  // fixed order = ascending node id
    if (task.memory_mb <= env.residual_memory_mb(node_id)) {
      cursor.next_index = (index + 1) % n;
      return {env.infra().node(node_id).layer, node_id};
    }
  }
  throw SchedulingError("fcfs: no feasible node for task " +
                        std::to_string(task.id));
}

Decision greedy_select(const Env& env) {
  const Task& task = env.current_task();
  int best_id = 0;
  double best_cost = std::numeric_limits<double>::infinity();
  for (const Node& node : env.infra().nodes()) {
    if (task.memory_mb > env.residual_memory_mb(node.id)) continue;
    const double cost = task_cost(task, node, env.infra());
    if (cost < best_cost) {  // strict: ties keep the lowest node id
      best_cost = cost;
      best_id = node.id;
    }
  }
  if (best_id == 0)
    throw SchedulingError("greedy: no feasible node for task " +
                          std::to_string(task.id));
  return {env.infra().node(best_id).layer, best_id};
}

namespace {

double mean_exec_time(const Task& task, const Infrastructure& infra) {
  double sum = 0.0;
  for (const Node& node : infra.nodes()) sum += exec_time(task, node);
  return sum / static_cast<double>(infra.node_count());
}

// Mean of the three layer-path transfer costs (edge pays nothing).
double mean_transfer_cost(const Task& task, const Infrastructure& infra) {
  const double fog_path = comm_time(infra.edge_fog(), task.output_mb);
  const double cloud_path =
      fog_path + comm_time(infra.fog_cloud(), task.output_mb);
  return (0.0 + fog_path + cloud_path) / 3.0;
}

}  // namespace

std::vector<double> heft_upward_ranks(const Workflow& workflow,
                                      const Infrastructure& infra) {
  const std::size_t n = workflow.tasks.size();
  std::vector<double> rank(n, 0.0);
  for (std::size_t i = n; i-- > 0;) {
    const Task& task = workflow.tasks[i];
    rank[i] = mean_exec_time(task, infra);
    if (i + 1 < n)
      rank[i] += mean_transfer_cost(task, infra) + rank[i + 1];
  }
  return rank;
}

ScheduleTrace heft_schedule(const Workflow& workflow,
                            const Infrastructure& infra, MemoryMode mode) {
  const std::vector<double> ranks = heft_upward_ranks(workflow, infra);
  std::vector<std::size_t> order(workflow.tasks.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return ranks[a] > ranks[b];
  });

  // For a chain the rank order is the chain order, so earliest start time is
  // simply the current makespan and EFT minimization is a per-task argmin
  // over the memory ledger.
  std::vector<double> residual;
  residual.reserve(infra.nodes().size());
  for (const Node& n : infra.nodes()) residual.push_back(n.memory_mb);

  ScheduleTrace trace;
  trace.entries.resize(workflow.tasks.size());
  double elapsed = 0.0;
  for (std::size_t pos : order) {
    const Task& task = workflow.tasks[pos];
    int best_id = 0;
    double best_finish = std::numeric_limits<double>::infinity();
    for (const Node& node : infra.nodes()) {
      if (task.memory_mb > residual[static_cast<std::size_t>(node.id) - 1])
        continue;
      const double finish = elapsed + task_cost(task, node, infra);
      if (finish < best_finish) {
        best_finish = finish;
        best_id = node.id;
      }
    }
    if (best_id == 0)
      throw SchedulingError("heft: no feasible node for task " +
                            std::to_string(task.id));
    if (mode == MemoryMode::persistent)
      residual[static_cast<std::size_t>(best_id) - 1] -= task.memory_mb;
    const double cost = task_cost(task, infra.node(best_id), infra);
    trace.entries[pos] = {task.id, best_id, cost};
    elapsed = best_finish;
  }
  return trace;
}

OracleResult oracle_optimal(const Workflow& workflow,
                            const Infrastructure& infra, MemoryMode mode) {
  const int task_count = static_cast<int>(workflow.tasks.size());
  if (task_count > kOracleMaxTasks)
    throw ConfigError("oracle: instance too large (" +
                      std::to_string(task_count) + " tasks, limit " +
                      std::to_string(kOracleMaxTasks) + ")");

  const int n = infra.node_count();
  // cost[t][j] for node id j+1; infinity when statically infeasible
  std::vector<std::vector<double>> cost(
      static_cast<std::size_t>(task_count),
      std::vector<double>(static_cast<std::size_t>(n)));
  std::vector<double> suffix_min(static_cast<std::size_t>(task_count) + 1, 0.0);
  for (int t = task_count - 1; t >= 0; --t) {
    const Task& task = workflow.tasks[static_cast<std::size_t>(t)];
    double best = std::numeric_limits<double>::infinity();
    for (int j = 0; j < n; ++j) {
      const Node& node = infra.nodes()[static_cast<std::size_t>(j)];
      const double c = task.memory_mb <= node.memory_mb
                           ? task_cost(task, node, infra)
                           : std::numeric_limits<double>::infinity();
      cost[static_cast<std::size_t>(t)][static_cast<std::size_t>(j)] = c;
      best = std::min(best, c);
    }
    if (!std::isfinite(best))
      throw SchedulingError("oracle: task " + std::to_string(t + 1) +
                            " fits on no node");
    suffix_min[static_cast<std::size_t>(t)] =
        best + suffix_min[static_cast<std::size_t>(t) + 1];
  }

  // Children expanded cheapest-first per task so the greedy-like incumbent is
  // found immediately and the admissible bound prunes aggressively.
  std::vector<std::vector<int>> node_order(
      static_cast<std::size_t>(task_count));
  for (int t = 0; t < task_count; ++t) {
    auto& ord = node_order[static_cast<std::size_t>(t)];
    for (int j = 0; j < n; ++j) ord.push_back(j);
    std::stable_sort(ord.begin(), ord.end(), [&](int a, int b) {
      return cost[static_cast<std::size_t>(t)][static_cast<std::size_t>(a)] <
             cost[static_cast<std::size_t>(t)][static_cast<std::size_t>(b)];
    });
  }

  std::vector<double> residual;
  residual.reserve(infra.nodes().size());
  for (const Node& node : infra.nodes()) residual.push_back(node.memory_mb);

  std::vector<int> assignment(static_cast<std::size_t>(task_count), -1);
  std::vector<int> best_assignment;
  double best_makespan = std::numeric_limits<double>::infinity();

  // Iterative DFS; first strictly-improving leaf wins, so equal-makespan
  // solutions resolve deterministically via the fixed expansion order.
  std::function<void(int, double)> dfs = [&](int t, double partial) {
    if (partial + suffix_min[static_cast<std::size_t>(t)] >= best_makespan)
      return;
    if (t == task_count) {
      best_makespan = partial;
      best_assignment = assignment;
      return;
    }
    const Task& task = workflow.tasks[static_cast<std::size_t>(t)];
    for (int j : node_order[static_cast<std::size_t>(t)]) {
      const double c =
          cost[static_cast<std::size_t>(t)][static_cast<std::size_t>(j)];
      if (!std::isfinite(c)) break;  // order is by cost; the rest are infeasible
      if (task.memory_mb > residual[static_cast<std::size_t>(j)]) continue;
      assignment[static_cast<std::size_t>(t)] = j;
      if (mode == MemoryMode::persistent) {
        residual[static_cast<std::size_t>(j)] -= task.memory_mb;
        dfs(t + 1, partial + c);
        residual[static_cast<std::size_t>(j)] += task.memory_mb;
      } else {
        dfs(t + 1, partial + c);
      }
    }
    assignment[static_cast<std::size_t>(t)] = -1;
  };
  dfs(0, 0.0);

  if (best_assignment.empty())
    throw SchedulingError("oracle: no feasible assignment exists");

  OracleResult result;
  result.makespan_s = 0.0;
  for (int t = 0; t < task_count; ++t) {
    const int j = best_assignment[static_cast<std::size_t>(t)];
    const double c =
        cost[static_cast<std::size_t>(t)][static_cast<std::size_t>(j)];
    result.trace.entries.push_back({t + 1, j + 1, c});
    result.makespan_s += c;
  }
  return result;
}

EpisodeResult run_episode(Env& env, const Workflow& workflow,
                          const PolicyFn& policy) {
  env.reset(workflow);
  EpisodeResult result;
  try {
    while (!env.done()) {
      const Decision d = policy(env);
      const auto step = env.step(d.layer, d.node_id);
      result.reward_sum += step.reward;
    }
  } catch (const SchedulingError&) {
    result.feasible = false;
  }
  result.trace = env.trace();
  result.makespan_s = env.elapsed_makespan_s();
  return result;
}

}  // namespace cfe

// Copyright (c) 2026 cfesched contributors
// SPDX-License-Identifier: Apache-2.0

#include "cfe/env.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "cfe/errors.hpp"

namespace cfe {

const char* to_string(MemoryMode mode) {
  return mode == MemoryMode::persistent ? "persistent" : "transient";
}

MemoryMode memory_mode_from_string(const std::string& s) {
  if (s == "persistent") return MemoryMode::persistent;
  if (s == "transient") return MemoryMode::transient;
  throw ConfigError("unknown memory mode: " + s +
                    " (expected persistent|transient)");
}

double reward(double cost_s, double exec_s, bool done,
              const RewardConfig& cfg) {
  assert(cost_s >= exec_s && exec_s >= 0.0);
  const double efficiency = cost_s > 0.0 ? exec_s / cost_s : 1.0;
  return -cfg.makespan_weight * (cost_s / cfg.makespan_target_s) +
         cfg.beta1 * (done ? 1.0 : 0.0) + cfg.beta2 * efficiency;
}

double makespan(const ScheduleTrace& trace, const Workflow& workflow) {
  if (trace.entries.size() != workflow.tasks.size())
    throw ConfigError("makespan: trace has " +
                      std::to_string(trace.entries.size()) + " entries for " +
                      std::to_string(workflow.tasks.size()) + " tasks");
  double total = 0.0;
  for (std::size_t i = 0; i < trace.entries.size(); ++i) {
    if (trace.entries[i].task_id != static_cast<int>(i) + 1)
      throw ConfigError("makespan: trace entry " + std::to_string(i) +
                        " has task_id " +
                        std::to_string(trace.entries[i].task_id));
    total += trace.entries[i].cost_s;
  }
  return total;
}

double validate_trace(const ScheduleTrace& trace, const Workflow& workflow,
                      const Infrastructure& infra, MemoryMode mode) {
  if (trace.entries.size() != workflow.tasks.size())
    throw ConfigError("trace replay: workflow `" + workflow.id + "`: " +
                      std::to_string(trace.entries.size()) + " entries for " +
                      std::to_string(workflow.tasks.size()) + " tasks");
  std::vector<double> residual;
  residual.reserve(infra.nodes().size());
  for (const Node& n : infra.nodes()) residual.push_back(n.memory_mb);

  double total = 0.0;
  for (std::size_t i = 0; i < trace.entries.size(); ++i) {
    const TraceEntry& e = trace.entries[i];
    const Task& task = workflow.tasks[i];
    if (e.task_id != task.id)
      throw ConfigError("trace replay: workflow `" + workflow.id +
                        "`: entry " + std::to_string(i) + " has task_id " +
                        std::to_string(e.task_id) + ", expected " +
                        std::to_string(task.id));
    if (e.node_id < 1 || e.node_id > infra.node_count())
      throw ConfigError("trace replay: workflow `" + workflow.id +
                        "`: unknown node id " + std::to_string(e.node_id));
    double& avail = residual[static_cast<std::size_t>(e.node_id) - 1];
    if (task.memory_mb > avail)
      throw ConfigError("trace replay: workflow `" + workflow.id + "`: task " +
                        std::to_string(task.id) + " infeasible on node " +
                        std::to_string(e.node_id));
    if (mode == MemoryMode::persistent) avail -= task.memory_mb;
    const double cost = task_cost(task, infra.node(e.node_id), infra);
    if (cost != e.cost_s)
      throw ConfigError("trace replay: workflow `" + workflow.id + "`: task " +
                        std::to_string(task.id) + " cost mismatch");
    total += cost;
  }
  return total;
}

Env::Env(const Infrastructure& infra, MemoryMode mode, RewardConfig reward_cfg,
         FeatureScale scale)
    : infra_(&infra), mode_(mode), reward_cfg_(reward_cfg), scale_(scale) {
  residual_mb_.resize(infra.nodes().size());
  available_s_.resize(infra.nodes().size());
}

void Env::reset(const Workflow& workflow) {
  if (workflow.tasks.empty())
    throw std::logic_error("env: cannot reset with an empty workflow");
  workflow_ = workflow;
  for (std::size_t i = 0; i < residual_mb_.size(); ++i) {
    residual_mb_[i] = infra_->nodes()[i].memory_mb;
    available_s_[i] = 0.0;
  }
  link_traffic_mb_ = {0.0, 0.0};
  total_output_mb_ = 0.0;
  for (const Task& t : workflow_.tasks) total_output_mb_ += t.output_mb;
  task_index_ = 0;
  elapsed_s_ = 0.0;
  trace_.entries.clear();
}

const Task& Env::current_task() const {
  if (done()) throw std::logic_error("env: episode is complete");
  return workflow_.tasks[static_cast<std::size_t>(task_index_)];
}

double Env::residual_memory_mb(int node_id) const {
  return residual_mb_[static_cast<std::size_t>(node_id) - 1];
}

double Env::available_at_s(int node_id) const {
  return available_s_[static_cast<std::size_t>(node_id) - 1];
}

std::vector<int> Env::feasible_nodes(Layer layer) const {
  const Task& task = current_task();
  std::vector<int> out;
  for (int id : infra_->node_ids(layer))
    if (task.memory_mb <= residual_memory_mb(id)) out.push_back(id);
  return out;
}

bool Env::layer_feasible(Layer layer) const {
  const Task& task = current_task();
  for (int id : infra_->node_ids(layer))
    if (task.memory_mb <= residual_memory_mb(id)) return true;
  return false;
}

bool Env::any_feasible() const {
  for (Layer layer : kLayers)
    if (layer_feasible(layer)) return true;
  return false;
}

Env::StepResult Env::step(Layer layer, int node_id) {
  const Task& task = current_task();
  const Node& node = infra_->node(node_id);
  if (node.layer != layer)
    throw std::logic_error("env: node " + std::to_string(node_id) +
                           " is not in layer " + to_string(layer));
  if (task.memory_mb > residual_memory_mb(node_id))
    throw std::logic_error("env: infeasible assignment of task " +
                           std::to_string(task.id) + " to node " +
                           std::to_string(node_id) +
                           " (caller must mask first)");

  const double cost = task_cost(task, node, *infra_);
  const double exec = exec_time(task, node);
  available_s_[static_cast<std::size_t>(node_id) - 1] += cost;
  if (mode_ == MemoryMode::persistent)
    residual_mb_[static_cast<std::size_t>(node_id) - 1] -= task.memory_mb;
  if (node.layer != Layer::edge) link_traffic_mb_[0] += task.output_mb;
  if (node.layer == Layer::cloud) link_traffic_mb_[1] += task.output_mb;

  elapsed_s_ += cost;
  trace_.entries.push_back({task.id, node_id, cost});
  ++task_index_;

  StepResult result;
  result.cost_s = cost;
  result.done = done();
  result.reward = reward(cost, exec, result.done, reward_cfg_);
  return result;
}

double Env::norm_avail(double avail_s) const {
  const double denom =
      reward_cfg_.makespan_target_s * static_cast<double>(task_count());
  return std::clamp(avail_s / denom, 0.0, 1.0);
}

std::array<double, 3> Env::task_features() const {
  if (done()) return {0.0, 0.0, 0.0};
  const Task& t = current_task();
  return {std::clamp(t.workload_mi / scale_.workload_mi, 0.0, 1.0),
          std::clamp(t.memory_mb / scale_.memory_mb, 0.0, 1.0),
          std::clamp(t.output_mb / scale_.output_mb, 0.0, 1.0)};
}

std::array<double, kGlobalStateDim> Env::global_state() const {
  std::array<double, kGlobalStateDim> s{};
  for (Layer layer : kLayers) {
    const auto& ids = infra_->node_ids(layer);
    double load = 0.0, free_mem = 0.0, cap_mem = 0.0;
    for (int id : ids) {
      load += norm_avail(available_at_s(id));
      free_mem += residual_memory_mb(id);
      cap_mem += infra_->node(id).memory_mb;
    }
    s[static_cast<int>(layer)] = load / static_cast<double>(ids.size());
    s[3 + static_cast<int>(layer)] = free_mem / cap_mem;
  }
  const double traffic_denom = total_output_mb_ > 0.0 ? total_output_mb_ : 1.0;
  s[6] = std::clamp(link_traffic_mb_[0] / traffic_denom, 0.0, 1.0);
  s[7] = std::clamp(link_traffic_mb_[1] / traffic_denom, 0.0, 1.0);
  const auto feats = task_features();
  s[8] = feats[0];
  s[9] = feats[1];
  s[10] = feats[2];
  s[11] = static_cast<double>(task_count() - task_index_) /
          static_cast<double>(task_count());
  return s;
}

int Env::local_state_dim(Layer layer) const {
  return 3 * static_cast<int>(infra_->node_ids(layer).size()) + 3;
}

std::vector<double> Env::local_state(Layer layer) const {
  const auto& ids = infra_->node_ids(layer);
  std::vector<double> s;
  s.reserve(static_cast<std::size_t>(local_state_dim(layer)));
  for (int id : ids) {
    const Node& n = infra_->node(id);
    s.push_back(residual_memory_mb(id) / n.memory_mb);
    s.push_back(norm_avail(available_at_s(id)));
    s.push_back(n.capacity_mips / infra_->max_capacity_mips());
  }
  const auto feats = task_features();
  s.insert(s.end(), feats.begin(), feats.end());
  return s;
}

std::uint32_t Env::feasible_mask(Layer layer) const {
  if (done()) return 0;
  const Task& task = current_task();
  const auto& ids = infra_->node_ids(layer);
  std::uint32_t mask = 0;
  for (std::size_t i = 0; i < ids.size(); ++i)
    if (task.memory_mb <= residual_memory_mb(ids[i]))
      mask |= (1u << i);
  return mask;
}

void write_trace_csv(const ScheduleTrace& trace, const Infrastructure& infra,
                     const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open for writing: " + path);
  out << "task_id,layer,node_id,cost_s,cum_makespan_s\n";
  double cum = 0.0;
  char buf[64];
  for (const TraceEntry& e : trace.entries) {
    cum += e.cost_s;
    out << e.task_id << ',' << to_string(infra.node(e.node_id).layer) << ','
        << e.node_id << ',';
    std::snprintf(buf, sizeof(buf), "%.9f", e.cost_s);
    out << buf << ',';
    std::snprintf(buf, sizeof(buf), "%.9f", cum);
    out << buf << '\n';
  }
  if (!out) throw ConfigError("write failed: " + path);
}

}  // namespace cfe

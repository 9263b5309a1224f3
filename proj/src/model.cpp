// Copyright (c) 2026 cfesched contributors
// SPDX-License-Identifier: Apache-2.0

#include "cfe/model.hpp"

#include <algorithm>
#include <cassert>

#include "cfe/config.hpp"
#include "cfe/errors.hpp"

namespace cfe {

const char* to_string(Layer layer) {
  switch (layer) {
    case Layer::edge: return "edge";
    case Layer::fog: return "fog";
    case Layer::cloud: return "cloud";
  }
  return "?";
}

std::optional<Layer> layer_from_string(const std::string& s) {
  if (s == "edge") return Layer::edge;
  if (s == "fog") return Layer::fog;
  if (s == "cloud") return Layer::cloud;
  return std::nullopt;
}

TaskCountBand task_count_band(Level level) {
  switch (level) {
    case Level::L1: return {5, 8};
    case Level::L2: return {9, 12};
    case Level::L3: return {13, 18};
    case Level::L4: return {19, 25};
  }
  return {0, 0};
}

const char* to_string(Level level) {
  switch (level) {
    case Level::L1: return "L1";
    case Level::L2: return "L2";
    case Level::L3: return "L3";
    case Level::L4: return "L4";
  }
  return "?";
}

std::optional<Level> level_from_string(const std::string& s) {
  for (Level lvl : kLevels)
    if (s == to_string(lvl)) return lvl;
  return std::nullopt;
}

std::optional<Level> level_for_task_count(int count) {
  for (Level lvl : kLevels) {
    const auto band = task_count_band(lvl);
    if (count >= band.lo && count <= band.hi) return lvl;
  }
  return std::nullopt;
}

Infrastructure::Infrastructure(std::vector<Node> nodes, LinkSpec edge_fog,
                               LinkSpec fog_cloud)
    : nodes_(std::move(nodes)), edge_fog_(edge_fog), fog_cloud_(fog_cloud) {
  if (edge_fog_.from != Layer::edge || edge_fog_.to != Layer::fog ||
      fog_cloud_.from != Layer::fog || fog_cloud_.to != Layer::cloud)
    throw ConfigError("infrastructure: links must be edge->fog and fog->cloud");
  for (const LinkSpec* link : {&edge_fog_, &fog_cloud_}) {
    if (link->latency_s < 0.0)
      throw ConfigError("infrastructure: link latency must be >= 0");
    if (link->bandwidth_mbps <= 0.0)
      throw ConfigError("infrastructure: link bandwidth must be > 0");
  }
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    Node& n = nodes_[i];
    if (n.id != static_cast<int>(i) + 1)
      throw ConfigError("infrastructure: node ids must be 1..N in layer order");
    if (n.capacity_mips <= 0.0 || n.memory_mb <= 0.0)
      throw ConfigError("infrastructure: node " + std::to_string(n.id) +
                        ": capacity and memory must be > 0");
    by_layer_[static_cast<int>(n.layer)].push_back(n.id);
    max_capacity_mips_ = std::max(max_capacity_mips_, n.capacity_mips);
    max_memory_mb_ = std::max(max_memory_mb_, n.memory_mb);
  }
  for (Layer layer : kLayers)
    if (node_ids(layer).empty())
      throw ConfigError(std::string("infrastructure: empty layer: ") +
                        to_string(layer));
  // the per-layer blocks must be contiguous and in edge/fog/cloud order
  int expect = 1;
  for (Layer layer : kLayers)
    for (int id : node_ids(layer))
      if (id != expect++)
        throw ConfigError("infrastructure: nodes must be grouped by layer");
}

const Node& Infrastructure::node(int id) const {
  assert(id >= 1 && id <= node_count());
  return nodes_[static_cast<std::size_t>(id) - 1];
}

Infrastructure Infrastructure::builtin_default() {
  std::vector<Node> nodes;
  const double edge_caps[] = {800.0, 1000.0, 1100.0, 1200.0};
  const double fog_caps[] = {2500.0, 2750.0, 3000.0};
  const double fog_mem[] = {6144.0, 7168.0, 8192.0};
  int id = 1;
  for (double c : edge_caps) nodes.push_back({id++, Layer::edge, c, 2048.0});
  for (int i = 0; i < 3; ++i)
    nodes.push_back({id++, Layer::fog, fog_caps[i], fog_mem[i]});
  nodes.push_back({id++, Layer::cloud, 8000.0, 32768.0});
  return Infrastructure(std::move(nodes),
                        {Layer::edge, Layer::fog, 0.010, 200.0},
                        {Layer::fog, Layer::cloud, 0.040, 100.0});
}

Infrastructure Infrastructure::load(const std::string& path) {
  const KeyValueFile kv = KeyValueFile::parse_file(path);
  std::vector<Node> nodes;
  int id = 1;
  for (Layer layer : kLayers) {
    const std::string prefix = to_string(layer);
    const auto caps = kv.get_double_list(prefix + ".capacity_mips");
    const auto mems = kv.get_double_list(prefix + ".memory_mb");
    if (caps.size() != mems.size())
      throw ConfigError(path + ": " + prefix +
                        ": capacity_mips and memory_mb lists differ in length");
    for (std::size_t i = 0; i < caps.size(); ++i)
      nodes.push_back({id++, layer, caps[i], mems[i]});
  }
  LinkSpec ef{Layer::edge, Layer::fog,
              kv.get_double("link.edge_fog.latency_s"),
              kv.get_double("link.edge_fog.bandwidth_mbps")};
  LinkSpec fc{Layer::fog, Layer::cloud,
              kv.get_double("link.fog_cloud.latency_s"),
              kv.get_double("link.fog_cloud.bandwidth_mbps")};
  return Infrastructure(std::move(nodes), ef, fc);
}

double comm_time(const LinkSpec& link, double data_mb) {
  assert(data_mb >= 0.0);
  return link.latency_s + 8.0 * data_mb / link.bandwidth_mbps;
}

double exec_time(const Task& task, const Node& node) {
  assert(node.capacity_mips > 0.0);
  return task.workload_mi / node.capacity_mips;
}

double task_cost(const Task& task, const Node& node,
                 const Infrastructure& infra) {
  switch (node.layer) {
    case Layer::edge:
      return exec_time(task, node);
    case Layer::fog:
      return comm_time(infra.edge_fog(), task.output_mb) +
             exec_time(task, node);
    case Layer::cloud:
      return comm_time(infra.edge_fog(), task.output_mb) +
             comm_time(infra.fog_cloud(), task.output_mb) +
             exec_time(task, node);
  }
  return 0.0;
}

}  // namespace cfe

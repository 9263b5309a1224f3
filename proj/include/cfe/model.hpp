// Copyright (c) 2026 cfesched contributors
// SPDX-License-Identifier: Apache-2.0
//
// Core value types for the three-layer cloud-fog-edge testbed and the
// closed-form per-assignment cost model.

#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace cfe {

enum class Layer { edge = 0, fog = 1, cloud = 2 };

inline constexpr std::array<Layer, 3> kLayers{Layer::edge, Layer::fog,
                                              Layer::cloud};

const char* to_string(Layer layer);
std::optional<Layer> layer_from_string(const std::string& s);

// Workflow difficulty levels, defined by their task-count bands.
enum class Level { L1 = 1, L2 = 2, L3 = 3, L4 = 4 };

inline constexpr std::array<Level, 4> kLevels{Level::L1, Level::L2, Level::L3,
                                              Level::L4};

struct TaskCountBand {
  int lo;
  int hi;
};

// L1: 5-8, L2: 9-12, L3: 13-18, L4: 19-25
TaskCountBand task_count_band(Level level);
const char* to_string(Level level);
std::optional<Level> level_from_string(const std::string& s);
// Bands are disjoint, so a task count identifies its level.
std::optional<Level> level_for_task_count(int count);

// One unit of work: compute demand (MI), memory footprint (MB) and the size
// of the result it ships downstream (MB).
struct Task {
  int id = 0;  // 1-based position within its workflow
  double workload_mi = 0.0;
  double memory_mb = 0.0;
  double output_mb = 0.0;

  bool operator==(const Task&) const = default;
};

// A strictly ordered task chain; precedence is implicit in the order.
struct Workflow {
  std::string id;
  Level level = Level::L1;
  std::vector<Task> tasks;

  bool operator==(const Workflow&) const = default;
};

struct Node {
  int id = 0;  // 1-based, assigned in layer order (edge block first)
  Layer layer = Layer::edge;
  double capacity_mips = 0.0;
  double memory_mb = 0.0;
};

// Directed inter-layer link, lower layer towards upper layer.
struct LinkSpec {
  Layer from = Layer::edge;
  Layer to = Layer::fog;
  double latency_s = 0.0;
  double bandwidth_mbps = 0.0;
};

class Infrastructure {
 public:
  Infrastructure(std::vector<Node> nodes, LinkSpec edge_fog,
                 LinkSpec fog_cloud);

  // The built-in reference testbed: 4 edge nodes (800/1000/1100/1200 MIPS,
  // 2048 MB each), 3 fog nodes (2500/2750/3000 MIPS, 6144/7168/8192 MB),
  // 1 cloud node (8000 MIPS, 32768 MB); links 10 ms @ 200 Mbps and
  // 40 ms @ 100 Mbps.
  static Infrastructure builtin_default();

  // Key-value config file, see docs/infra format in the README.
  static Infrastructure load(const std::string& path);

  const std::vector<Node>& nodes() const { return nodes_; }
  const Node& node(int id) const;  // 1-based id
  const std::vector<int>& node_ids(Layer layer) const {
    return by_layer_[static_cast<int>(layer)];
  }
  int node_count() const { return static_cast<int>(nodes_.size()); }

  const LinkSpec& edge_fog() const { return edge_fog_; }
  const LinkSpec& fog_cloud() const { return fog_cloud_; }

  double max_capacity_mips() const { return max_capacity_mips_; }
  double max_memory_mb() const { return max_memory_mb_; }

 private:
  std::vector<Node> nodes_;
  std::array<std::vector<int>, 3> by_layer_;
  LinkSpec edge_fog_;
  LinkSpec fog_cloud_;
  double max_capacity_mips_ = 0.0;
  double max_memory_mb_ = 0.0;
};

// Link traversal time for a payload of data_mb megabytes:
// latency + 8 * data_mb / bandwidth_mbps (decimal units, 8 Mbit per MB).
double comm_time(const LinkSpec& link, double data_mb);

// workload_mi / capacity_mips
double exec_time(const Task& task, const Node& node);

// Per-assignment cost. Edge nodes run the task in place; fog adds the
// edge-to-fog transfer of the task's output payload; cloud adds both hops.
// The same payload is charged on each hop, and the path always starts at the
// edge layer regardless of where the previous task ran.
double task_cost(const Task& task, const Node& node,
                 const Infrastructure& infra);

}  // namespace cfe

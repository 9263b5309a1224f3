// Copyright (c) 2026 cfesched contributors
// SPDX-License-Identifier: Apache-2.0
//
// Seeded synthetic workflow generation and the line-delimited corpus format.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cfe/model.hpp"

namespace cfe {

struct RealRange {
  double lo = 0.0;
  double hi = 0.0;
};

struct GenSpec {
  Level level = Level::L1;
  std::uint64_t seed = 0;
  int count = 1;
  // Defaults span sub-second edge execution through multi-second
  // cloud-favourable tasks, so the compute/transfer trade-off is live.
  RealRange workload_mi{200.0, 4000.0};
  RealRange memory_mb{128.0, 2048.0};
  RealRange output_mb{1.0, 50.0};

  void validate() const;  // throws ConfigError on bad ranges
};

// Deterministic in (seed, level, index): the task stream is
// substream(seed, level, index), drawn as task count first, then
// (workload, memory, output) per task. Workflow id is "L<k>-<seed>-<index>".
Workflow generate_workflow(const GenSpec& spec, int index);

std::vector<Workflow> generate_corpus(const GenSpec& spec);

// Corpus CSV: header `workflow_id,task_id,workload_mi,memory_mb,output_mb`,
// one task per line, tasks of a workflow contiguous and in order. Values are
// printed with round-trip precision, so load(save(w)) == w exactly.
void save_workflows(const std::vector<Workflow>& workflows,
                    const std::string& path);
std::vector<Workflow> load_workflows(const std::string& path);

}  // namespace cfe
